#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "dagvae/graph.hpp"

namespace dagvae {

/// Ordering key of one labeling: the node type sequence followed by the
/// upper-triangular slot values column by column (column j lists the slots
/// (0, j) .. (j-1, j)). Compared lexicographically.
struct GraphKey {
  bool edge_labeled = false;
  std::vector<int> types;
  std::vector<int> slots;

  friend auto operator<=>(const GraphKey&, const GraphKey&) = default;
  friend bool operator==(const GraphKey&, const GraphKey&) = default;
};

/// Key of `g` under its current labeling (g must be upper triangular for the
/// key to describe all of its edges).
GraphKey labeling_key(const ArchGraph& g);

/// Inverse of labeling_key.
ArchGraph graph_from_key(const GraphKey& key);

/// Relabels `g` into the lexicographically minimal upper-triangular form over
/// all of its topological orders. Throws CycleDetected.
ArchGraph canonicalize(const ArchGraph& g);

GraphKey canonical_key(const ArchGraph& g);

/// 16 hex digit FNV-1a digest of the canonical key.
std::string canonical_hash(const ArchGraph& g);
std::string key_hash(const GraphKey& key);

inline constexpr int kIsomorphismNodeBudget = 10;

/// Throws TooLarge beyond kIsomorphismNodeBudget nodes.
bool is_isomorphic(const ArchGraph& a, const ArchGraph& b);

/// Applies `perm` (new index of old node v is perm[v]) to every node.
ArchGraph permute(const ArchGraph& g, const std::vector<int>& perm);

}  // namespace dagvae
