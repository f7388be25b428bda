// Brute-force reference implementations used as test oracles. They share
// no code with the library's canonical search or enumeration.
#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "dagvae/graph.hpp"

namespace oracle {

using dagvae::ArchGraph;

/// Some permutation maps a onto b (labels and slots preserved)?
inline bool isomorphic(const ArchGraph& a, const ArchGraph& b) {
  const int n = a.node_count();
  if (n != b.node_count() || a.edge_labeled() != b.edge_labeled()) return false;
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    bool ok = true;
    for (int v = 0; v < n && ok; ++v) ok = a.type(v) == b.type(p[v]);
    for (int i = 0; i < n && ok; ++i)
      for (int k = 0; k < n && ok; ++k) ok = a.slot(i, k) == b.slot(p[i], p[k]);
    if (ok) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

/// Minimal (types, upper-triangular slots column by column) encoding over
/// every permutation that leaves all edges pointing forward, i.e. over every
/// topological order, listed by plain backtracking.
inline std::vector<int> minimal_encoding(const ArchGraph& g) {
  const int n = g.node_count();
  std::vector<int> order, indeg(n, 0), best;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (g.slot(i, k) != 0) ++indeg[k];
  std::vector<bool> used(n, false);
  auto emit = [&] {
    std::vector<int> enc;
    for (int v : order) enc.push_back(g.type(v));
    for (int k = 1; k < n; ++k)
      for (int i = 0; i < k; ++i) enc.push_back(g.slot(order[i], order[k]));
    if (best.empty() || enc < best) best = enc;
  };
  auto rec = [&](auto&& self) -> void {
    if (static_cast<int>(order.size()) == n) return emit();
    for (int v = 0; v < n; ++v) {
      if (used[v] || indeg[v] != 0) continue;
      used[v] = true;
      order.push_back(v);
      for (int k = 0; k < n; ++k)
        if (g.slot(v, k) != 0) --indeg[k];
      self(self);
      for (int k = 0; k < n; ++k)
        if (g.slot(v, k) != 0) ++indeg[k];
      order.pop_back();
      used[v] = false;
    }
  };
  rec(rec);
  return best;
}

inline std::vector<int> encoding_of(const ArchGraph& g) {
  const int n = g.node_count();
  std::vector<int> enc(g.node_types().begin(), g.node_types().end());
  for (int k = 1; k < n; ++k)
    for (int i = 0; i < k; ++i) enc.push_back(g.slot(i, k));
  return enc;
}

/// Both-way reachability check written independently of check_validity.
inline bool fully_connected(const ArchGraph& g) {
  const int n = g.node_count();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) {
    reach[i][i] = true;
    for (int k = 0; k < n; ++k)
      if (g.has_edge(i, k)) reach[i][k] = true;
  }
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (reach[i][m] && reach[m][k]) reach[i][k] = true;
  for (int v = 0; v < n; ++v)
    if (!reach[0][v] || !reach[v][n - 1]) return false;
  return true;
}

/// Distinct classes of `graphs` under `isomorphic`.
inline std::vector<ArchGraph> dedup(const std::vector<ArchGraph>& graphs) {
  std::vector<ArchGraph> out;
  for (const auto& g : graphs) {
    bool seen = false;
    for (const auto& h : out)
      if (isomorphic(g, h)) {
        seen = true;
        break;
      }
    if (!seen) out.push_back(g);
  }
  return out;
}

/// Graph with node v removed and every predecessor linked to every successor.
inline ArchGraph contract(const ArchGraph& g, int v) {
  const int n = g.node_count();
  std::vector<int> types;
  for (int u = 0; u < n; ++u)
    if (u != v) types.push_back(g.type(u));
  auto idx = [&](int u) { return u < v ? u : u - 1; };
  ArchGraph h(types);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      if (!g.has_edge(i, k)) continue;
      if (i != v && k != v) h.set_edge(idx(i), idx(k));
    }
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (g.has_edge(i, v) && g.has_edge(v, k)) h.set_edge(idx(i), idx(k));
  return h;
}

/// Every class obtained by inserting one node into g: position p, interior
/// type t, predecessor set P before p, successor set S from p on, and any
/// subset of seed edges inside P x S dropped. Kept when the result and its
/// contraction at p are both fully connected and the contraction fits
/// max_edges.
inline std::set<std::vector<int>> expansion_classes(const ArchGraph& g, int num_ops, std::optional<int> max_edges) {
  std::set<std::vector<int>> out, raw;
  const int n = g.node_count();
  for (int p = 1; p < n; ++p)
    for (int t = 1; t <= num_ops; ++t)
      for (int pm = 1; pm < (1 << p); ++pm)
        for (int sm = 1; sm < (1 << (n - p)); ++sm) {
          std::vector<std::pair<int, int>> droppable;
          for (auto [i, j] : g.edges())
            if (i < p && j >= p && (pm >> i & 1) && (sm >> (j - p) & 1)) droppable.push_back({i, j});
          for (int dm = 0; dm < (1 << droppable.size()); ++dm) {
            std::vector<int> types;
            for (int v = 0; v < n; ++v) {
              if (v == p) types.push_back(t);
              types.push_back(g.type(v));
            }
            auto at = [&](int v) { return v < p ? v : v + 1; };
            ArchGraph h(types);
            for (auto [i, j] : g.edges()) h.set_edge(at(i), at(j));
            for (std::size_t d = 0; d < droppable.size(); ++d)
              if (dm >> d & 1) h.clear_edge(at(droppable[d].first), at(droppable[d].second));
            for (int i = 0; i < p; ++i)
              if (pm >> i & 1) h.set_edge(i, p);
            for (int j = p; j < n; ++j)
              if (sm >> (j - p) & 1) h.set_edge(p, at(j));
            std::vector<int> key = encoding_of(h);
            key.push_back(p);
            if (!raw.insert(key).second) continue;
            if (!fully_connected(h)) continue;
            ArchGraph c = contract(h, p);
            if (max_edges && c.edge_count() > *max_edges) continue;
            if (!fully_connected(c)) continue;
            out.insert(minimal_encoding(h));
          }
        }
  return out;
}

// Every valid node-labeled graph of `spec` up to isomorphism, by brute force
// over node counts, interior labelings and triangular edge subsets.
inline std::set<std::vector<int>> space_classes(const dagvae::SearchSpaceSpec& spec) {
  std::set<std::vector<int>> classes;
  const int lo = spec.fixed_node_count.value_or(2), hi = spec.fixed_node_count.value_or(spec.max_nodes);
  for (int n = lo; n <= hi; ++n) {
    const int interior = n - 2, k = spec.num_ops(), slots = n * (n - 1) / 2;
    int labelings = 1;
    for (int i = 0; i < interior; ++i) labelings *= k;
    for (int lab = 0; lab < labelings; ++lab) {
      std::vector<int> types{0};
      for (int i = 0, x = lab; i < interior; ++i, x /= k) types.push_back(1 + x % k);
      types.push_back(k + 1);
      for (int mask = 0; mask < (1 << slots); ++mask) {
        if (spec.max_edges && __builtin_popcount(mask) > *spec.max_edges) continue;
        ArchGraph g(types);
        int bit = 0;
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j, ++bit)
            if (mask & (1 << bit)) g.set_edge(i, j);
        if (fully_connected(g)) classes.insert(minimal_encoding(g));
      }
    }
  }
  return classes;
}

/// Encodings of a list of graphs, for set comparisons.
inline std::set<std::vector<int>> encodings(const std::vector<ArchGraph>& graphs) {
  std::set<std::vector<int>> s;
  for (const auto& g : graphs) s.insert(encoding_of(g));
  return s;
}

}  // namespace oracle
