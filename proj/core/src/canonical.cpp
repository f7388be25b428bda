#include "dagvae/canonical.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <unordered_map>

#include "dagvae/error.hpp"

namespace dagvae {

GraphKey labeling_key(const ArchGraph& g) {
  GraphKey key;
  key.edge_labeled = g.edge_labeled();
  key.types = g.node_types();
  const int n = g.node_count();
  key.slots.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < j; ++i) key.slots.push_back(g.slot(i, j));
  return key;
}

ArchGraph graph_from_key(const GraphKey& key) {
  ArchGraph g(key.types, key.edge_labeled);
  const int n = g.node_count();
  std::size_t k = 0;
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < j; ++i, ++k) {
      int s = key.slots[k];
      if (s == 0) continue;
      if (key.edge_labeled)
        g.set_edge_op(i, j, s - 1);
      else
        g.set_edge(i, j);
    }
  return g;
}

ArchGraph permute(const ArchGraph& g, const std::vector<int>& perm) {
  const int n = g.node_count();
  std::vector<NodeTypeId> types(n);
  for (int v = 0; v < n; ++v) types[perm[v]] = g.type(v);
  ArchGraph out(std::move(types), g.edge_labeled());
  for (auto [i, j] : g.edges()) {
    if (g.edge_labeled())
      out.set_edge_op(perm[i], perm[j], *g.edge_op(i, j));
    else
      out.set_edge(perm[i], perm[j]);
  }
  return out;
}

namespace {

void require_acyclic(const ArchGraph& g) {
  const int n = g.node_count();
  std::vector<int> indeg(n, 0);
  for (auto [i, j] : g.edges()) {
    if (i == j) throw Error(ErrorKind::CycleDetected, "self loop on node " + std::to_string(i));
    ++indeg[j];
  }
  std::vector<int> ready;
  for (int v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.push_back(v);
  int visited = 0;
  while (!ready.empty()) {
    int u = ready.back();
    ready.pop_back();
    ++visited;
    for (int v : g.successors(u))
      if (--indeg[v] == 0) ready.push_back(v);
  }
  if (visited != n) throw Error(ErrorKind::CycleDetected, "graph has a directed cycle");
}

// Two phases. The minimal type sequence over all topological orders is a
// function of the set of placed nodes, so it is memoized per set. Orders
// realizing it are then searched column by column: column p holds the slots
// from every earlier position into position p, so it is fixed the moment a
// node is placed and only candidates with the smallest column continue.
class MinimalOrderSearch {
 public:
  explicit MinimalOrderSearch(const ArchGraph& g) : g_(g), n_(g.node_count()), pred_mask_(n_, 0), twin_of_(n_) {
    if (n_ > 63) throw Error(ErrorKind::TooLarge, "canonical search limited to 63 nodes");
    for (auto [i, j] : g.edges()) pred_mask_[j] |= bit(i);
    // Equal type and identical neighborhoods: swapped by an automorphism.
    for (int v = 0; v < n_; ++v) {
      twin_of_[v] = v;
      for (int u = 0; u < v; ++u)
        if (twins(u, v)) {
          twin_of_[v] = twin_of_[u];
          break;
        }
    }
  }

  std::vector<int> run() {
    target_ = suffix(0);
    order_.reserve(n_);
    search(0);
    return best_order_;
  }

 private:
  static std::uint64_t bit(int v) { return std::uint64_t{1} << v; }

  bool twins(int u, int v) const {
    if (g_.type(u) != g_.type(v)) return false;
    for (int w = 0; w < n_; ++w)
      if (g_.slot(w, u) != g_.slot(w, v) || g_.slot(u, w) != g_.slot(v, w)) return false;
    return true;
  }

  bool available(std::uint64_t placed, int v) const {
    return !(placed & bit(v)) && (pred_mask_[v] & ~placed) == 0;
  }

  // Minimal type sequence of the nodes outside `placed`.
  const std::vector<int>& suffix(std::uint64_t placed) {
    auto it = memo_.find(placed);
    if (it != memo_.end()) return it->second;
    std::vector<int> best;
    int min_type = -1;
    for (int v = 0; v < n_; ++v)
      if (available(placed, v) && (min_type < 0 || g_.type(v) < min_type)) min_type = g_.type(v);
    if (min_type >= 0) {
      bool have = false;
      std::vector<bool> seen(n_, false);
      for (int v = 0; v < n_; ++v) {
        if (!available(placed, v) || g_.type(v) != min_type || seen[twin_of_[v]]) continue;
        seen[twin_of_[v]] = true;
        const std::vector<int>& rest = suffix(placed | bit(v));
        if (!have || rest < best) {
          best = rest;
          have = true;
        }
      }
      best.insert(best.begin(), min_type);
    }
    return memo_.emplace(placed, std::move(best)).first->second;
  }

  std::vector<int> column(int v) const {
    std::vector<int> c(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) c[i] = g_.slot(order_[i], v);
    return c;
  }

  void search(std::uint64_t placed) {
    const int pos = static_cast<int>(order_.size());
    if (pos == n_) {
      if (!have_best_ || slots_ < best_slots_) {
        have_best_ = true;
        best_order_ = order_;
        best_slots_ = slots_;
      }
      return;
    }
    const std::vector<int> want(target_.begin() + pos + 1, target_.end());
    std::vector<int> candidates;
    std::vector<int> best_col;
    std::vector<bool> seen(n_, false);
    for (int v = 0; v < n_; ++v) {
      if (!available(placed, v) || g_.type(v) != target_[pos] || seen[twin_of_[v]]) continue;
      if (suffix(placed | bit(v)) != want) continue;
      seen[twin_of_[v]] = true;
      std::vector<int> c = column(v);
      if (candidates.empty() || c < best_col) {
        candidates.assign(1, v);
        best_col = std::move(c);
      } else if (c == best_col) {
        candidates.push_back(v);
      }
    }
    const std::size_t mark = slots_.size();
    slots_.insert(slots_.end(), best_col.begin(), best_col.end());
    // The flattened prefix is final; skip it once it exceeds the incumbent.
    const bool promising =
        !have_best_ || !std::lexicographical_compare(best_slots_.begin(), best_slots_.begin() + slots_.size(),
                                                     slots_.begin(), slots_.end());
    for (std::size_t k = 0; promising && k < candidates.size(); ++k) {
      order_.push_back(candidates[k]);
      search(placed | bit(candidates[k]));
      order_.pop_back();
    }
    slots_.resize(mark);
  }

  const ArchGraph& g_;
  int n_;
  std::vector<std::uint64_t> pred_mask_;
  std::vector<int> twin_of_;
  std::unordered_map<std::uint64_t, std::vector<int>> memo_;
  std::vector<int> target_;
  std::vector<int> order_;
  std::vector<int> slots_;
  bool have_best_ = false;
  std::vector<int> best_order_;
  std::vector<int> best_slots_;
};

}  // namespace

ArchGraph canonicalize(const ArchGraph& g) {
  require_acyclic(g);
  if (g.node_count() == 0) return g;
  std::vector<int> order = MinimalOrderSearch(g).run();
  std::vector<int> perm(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) perm[order[pos]] = static_cast<int>(pos);
  return permute(g, perm);
}

GraphKey canonical_key(const ArchGraph& g) { return labeling_key(canonicalize(g)); }

std::string key_hash(const GraphKey& key) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(key.edge_labeled ? 1 : 0);
  mix(key.types.size());
  for (int t : key.types) mix(static_cast<std::uint64_t>(t));
  for (int s : key.slots) mix(static_cast<std::uint64_t>(s));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string canonical_hash(const ArchGraph& g) { return key_hash(canonical_key(g)); }

bool is_isomorphic(const ArchGraph& a, const ArchGraph& b) {
  if (a.node_count() > kIsomorphismNodeBudget || b.node_count() > kIsomorphismNodeBudget)
    throw Error(ErrorKind::TooLarge, "isomorphism test limited to " +
                                         std::to_string(kIsomorphismNodeBudget) + " nodes");
  if (a.node_count() != b.node_count() || a.edge_labeled() != b.edge_labeled() ||
      a.edge_count() != b.edge_count())
    return false;
  auto ta = a.node_types(), tb = b.node_types();
  std::sort(ta.begin(), ta.end());
  std::sort(tb.begin(), tb.end());
  if (ta != tb) return false;
  return canonical_key(a) == canonical_key(b);
}

}  // namespace dagvae
