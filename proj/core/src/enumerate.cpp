#include "dagvae/enumerate.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <set>

#include "dagvae/canonical.hpp"
#include "dagvae/error.hpp"

namespace dagvae {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return (a > kSaturated - b) ? kSaturated : a + b;
}

std::uint64_t sat_pow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) r = sat_mul(r, base);
  return r;
}

std::uint64_t binomial(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

std::vector<int> node_counts(const SearchSpaceSpec& spec) {
  std::vector<int> counts;
  if (spec.fixed_node_count) {
    counts.push_back(*spec.fixed_node_count);
  } else {
    for (int n = 2; n <= spec.max_nodes; ++n) counts.push_back(n);
  }
  return counts;
}

// Number of edge assignments over `slots` upper-triangular slots.
std::uint64_t edge_assignments(const SearchSpaceSpec& spec, int slots) {
  if (spec.fixed_dense_edges) return sat_pow(spec.num_ops(), slots);
  const int kmax = spec.max_edges ? std::min(*spec.max_edges, slots) : slots;
  const std::uint64_t labels = spec.edge_labeled() ? spec.num_ops() : 1;
  std::uint64_t total = 0;
  for (int k = 0; k <= kmax; ++k)
    total = sat_add(total, sat_mul(binomial(slots, k), sat_pow(labels, k)));
  return total;
}

// Calls `fn(slot_values)` for every edge assignment permitted by the spec.
template <typename Fn>
void for_each_edge_assignment(const SearchSpaceSpec& spec, int slots, Fn&& fn) {
  std::vector<int> values(slots, 0);
  if (!spec.edge_labeled()) {
    const std::uint64_t limit = std::uint64_t{1} << slots;
    for (std::uint64_t mask = 0; mask < limit; ++mask) {
      if (spec.max_edges && std::popcount(mask) > *spec.max_edges) continue;
      for (int k = 0; k < slots; ++k) values[k] = static_cast<int>((mask >> k) & 1U);
      fn(values);
    }
    return;
  }
  // Edge-labeled: each slot holds 0 (absent) or 1+op; dense spaces skip 0.
  const int lo = spec.fixed_dense_edges ? 1 : 0;
  const int hi = spec.num_ops();
  std::fill(values.begin(), values.end(), lo);
  while (true) {
    int edges = 0;
    for (int v : values) edges += v != 0;
    if (!spec.max_edges || edges <= *spec.max_edges) fn(values);
    int k = 0;
    while (k < slots && values[k] == hi) values[k++] = lo;
    if (k == slots) break;
    ++values[k];
  }
}

}  // namespace

std::uint64_t enumeration_candidate_count(const SearchSpaceSpec& spec) {
  std::uint64_t total = 0;
  for (int n : node_counts(spec)) {
    const int slots = n * (n - 1) / 2;
    std::uint64_t per = sat_mul(sat_pow(spec.num_interior_types(), n - 2),
                                edge_assignments(spec, slots));
    total = sat_add(total, per);
  }
  return total;
}

std::vector<ArchGraph> enumerate_space(const SearchSpaceSpec& spec,
                                       const EnumerationBudget& budget) {
  spec.validate();
  const std::uint64_t candidates = enumeration_candidate_count(spec);
  if (candidates > budget.max_candidates)
    throw Error(ErrorKind::BudgetExceeded,
                "space '" + spec.name + "' needs " +
                    (candidates == kSaturated ? std::string("> 2^64")
                                              : std::to_string(candidates)) +
                    " candidate labelings; budget is " + std::to_string(budget.max_candidates));

  std::set<GraphKey> seen;
  for (int n : node_counts(spec)) {
    const int slots = n * (n - 1) / 2;
    const int interior = n - 2;
    std::vector<int> interior_types(interior, 1);
    while (true) {
      std::vector<NodeTypeId> types;
      types.reserve(n);
      types.push_back(spec.input_type());
      types.insert(types.end(), interior_types.begin(), interior_types.end());
      types.push_back(spec.output_type());

      for_each_edge_assignment(spec, slots, [&](const std::vector<int>& values) {
        ArchGraph g(types, spec.edge_labeled());
        int k = 0;
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j, ++k) {
            if (values[k] == 0) continue;
            if (spec.edge_labeled())
              g.set_edge_op(i, j, values[k] - 1);
            else
              g.set_edge(i, j);
          }
        if (!check_validity(g, spec).is_valid) return;
        if (seen.insert(canonical_key(g)).second && seen.size() > budget.max_graphs)
          throw Error(ErrorKind::BudgetExceeded,
                      "more than " + std::to_string(budget.max_graphs) + " graphs");
      });

      int k = 0;
      while (k < interior && interior_types[k] == spec.num_interior_types())
        interior_types[k++] = 1;
      if (k == interior) break;
      ++interior_types[k];
    }
  }

  std::vector<ArchGraph> out;
  out.reserve(seen.size());
  for (const auto& key : seen) out.push_back(graph_from_key(key));
  return out;
}

ArchGraph contract_node(const ArchGraph& g, int v) {
  const int n = g.node_count();
  std::vector<NodeTypeId> types;
  std::vector<int> index(n, -1);
  for (int u = 0; u < n; ++u) {
    if (u == v) continue;
    index[u] = static_cast<int>(types.size());
    types.push_back(g.type(u));
  }
  ArchGraph out(std::move(types), g.edge_labeled());
  for (auto [i, j] : g.edges()) {
    if (i == v || j == v) continue;
    out.set_edge(index[i], index[j]);
  }
  for (int p : g.predecessors(v))
    for (int s : g.successors(v)) out.set_edge(index[p], index[s]);
  return out;
}

std::vector<ArchGraph> expand_graph(const ArchGraph& g, int target_nodes,
                                    const SearchSpaceSpec& spec) {
  const int n = g.node_count();
  if (spec.edge_labeled())
    throw Error(ErrorKind::ConfigError, "expansion is defined for node-labeled spaces");
  if (target_nodes != n + 1)
    throw Error(ErrorKind::ConfigError, "target_nodes must equal node_count + 1");
  if (!check_validity_relaxed(g, spec, n, true).is_valid)
    throw Error(ErrorKind::ConfigError, "seed graph is not valid in the search space");
  if (n + 1 > 20) throw Error(ErrorKind::TooLarge, "expansion limited to 20 nodes");

  std::set<GraphKey> seen;
  // New node sits at index p of the expanded graph; old node u maps to u or u+1.
  for (int p = 1; p < n; ++p) {
    auto shifted = [p](int u) { return u < p ? u : u + 1; };
    const int before = p;          // old nodes 0..p-1
    const int after = n - p;       // old nodes p..n-1
    for (NodeTypeId t = 1; t <= spec.num_interior_types(); ++t) {
      for (std::uint32_t pmask = 1; pmask < (1U << before); ++pmask) {
        for (std::uint32_t smask = 1; smask < (1U << after); ++smask) {
          // Seed edges bypassed by the new node may be dropped.
          std::vector<std::pair<int, int>> optional_edges;
          bool contraction_adds_edge = false;
          for (int a = 0; a < before; ++a) {
            if (!((pmask >> a) & 1U)) continue;
            for (int b = 0; b < after; ++b) {
              if (!((smask >> b) & 1U)) continue;
              if (g.has_edge(a, p + b))
                optional_edges.emplace_back(a, p + b);
              else
                contraction_adds_edge = true;
            }
          }
          if (contraction_adds_edge) {
            // Contraction would add seed-absent edges; it must stay in-space.
            ArchGraph contracted = g;
            for (int a = 0; a < before; ++a)
              for (int b = 0; b < after; ++b)
                if (((pmask >> a) & 1U) && ((smask >> b) & 1U)) contracted.set_edge(a, p + b);
            if (!check_validity_relaxed(contracted, spec, n, true).is_valid) continue;
          }
          const std::uint32_t drop_limit = 1U << optional_edges.size();
          for (std::uint32_t drop = 0; drop < drop_limit; ++drop) {
            std::vector<NodeTypeId> types(n + 1);
            for (int u = 0; u < n; ++u) types[shifted(u)] = g.type(u);
            types[p] = t;
            ArchGraph x(std::move(types));
            for (auto [i, j] : g.edges()) x.set_edge(shifted(i), shifted(j));
            for (std::size_t k = 0; k < optional_edges.size(); ++k)
              if ((drop >> k) & 1U)
                x.clear_edge(shifted(optional_edges[k].first), shifted(optional_edges[k].second));
            for (int a = 0; a < before; ++a)
              if ((pmask >> a) & 1U) x.set_edge(a, p);
            for (int b = 0; b < after; ++b)
              if ((smask >> b) & 1U) x.set_edge(p, p + b + 1);
            if (!check_validity_relaxed(x, spec, n + 1, false).is_valid) continue;
            seen.insert(canonical_key(x));
          }
        }
      }
    }
  }
  std::vector<ArchGraph> out;
  out.reserve(seen.size());
  for (const auto& key : seen) out.push_back(graph_from_key(key));
  return out;
}

}  // namespace dagvae
