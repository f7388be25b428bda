#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dagvae/graph.hpp"

namespace dagvae {

struct EnumerationBudget {
  /// Upper bound on raw labelings inspected before giving up.
  std::uint64_t max_candidates = 50'000'000;
  /// Upper bound on distinct graphs returned.
  std::size_t max_graphs = 2'000'000;
};

/// Every canonical, valid, pairwise non-isomorphic graph of `spec`, sorted by
/// canonical key. Throws BudgetExceeded.
std::vector<ArchGraph> enumerate_space(const SearchSpaceSpec& spec,
                                       const EnumerationBudget& budget = {});

/// Raw labeling count enumerate_space would inspect for `spec`.
std::uint64_t enumeration_candidate_count(const SearchSpaceSpec& spec);

/// All canonical graphs with one extra interior node inserted into `g`.
///
/// The new node at position p receives a non-empty predecessor set P (nodes
/// before p) and a non-empty successor set S (nodes from p on). Seed edges in
/// P x S may be kept or dropped since the path through the new node covers
/// them; every other seed edge is kept. Contracting the new node (removing it
/// and linking P to S) must give a graph that is valid in `spec`, and the
/// expanded graph must be valid with the node bound raised to target_nodes
/// and no edge bound. Only node-labeled spaces are supported.
std::vector<ArchGraph> expand_graph(const ArchGraph& g, int target_nodes,
                                    const SearchSpaceSpec& spec);

/// Removes node v and connects each of its predecessors to each successor.
ArchGraph contract_node(const ArchGraph& g, int v);

}  // namespace dagvae
