#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dagvae {

/// Node type ids are dense: 0 is the input type, 1..K the interior types
/// (one per op for node-labeled spaces, a single "sum" type for edge-labeled
/// spaces) and K+1 the output type.
using NodeTypeId = int;

enum class LabelMode { NodeLabeled, EdgeLabeled };

/// Declarative constraints for a family of cell DAGs.
struct SearchSpaceSpec {
  std::string name;
  LabelMode label_mode = LabelMode::NodeLabeled;
  std::vector<std::string> op_vocabulary;
  int max_nodes = 2;
  std::optional<int> max_edges;
  std::optional<int> fixed_node_count;
  bool fixed_dense_edges = false;

  bool edge_labeled() const { return label_mode == LabelMode::EdgeLabeled; }
  int num_ops() const { return static_cast<int>(op_vocabulary.size()); }
  int num_interior_types() const { return edge_labeled() ? 1 : num_ops(); }
  int num_node_types() const { return num_interior_types() + 2; }
  NodeTypeId input_type() const { return 0; }
  NodeTypeId output_type() const { return num_interior_types() + 1; }
  bool is_interior_type(NodeTypeId t) const {
    return t >= 1 && t <= num_interior_types();
  }

  std::string node_type_name(NodeTypeId t) const;
  std::optional<NodeTypeId> node_type_from_name(const std::string& name) const;
  std::optional<int> op_from_name(const std::string& name) const;

  /// Throws ConfigError when the spec itself is malformed.
  void validate() const;

  friend bool operator==(const SearchSpaceSpec&, const SearchSpaceSpec&) = default;
};

namespace presets {
/// |V| <= 7, |E| <= 9, three node ops.
SearchSpaceSpec nb101_like();
/// 4 sum nodes, all 6 upper-triangular slots carry one of 5 ops.
SearchSpaceSpec nb201_like();
/// 8 nodes, 6 node ops, unbounded edges.
SearchSpaceSpec enas_like();
/// Small enumerable node-labeled space used as a desk-scale test bed.
SearchSpaceSpec mini(int max_nodes = 5, int num_ops = 2);
/// Exactly 4 nodes, a single op type.
SearchSpaceSpec mini4();
/// Resolves a preset by name ("nb101", "nb201", "enas", "mini", "mini4").
std::optional<SearchSpaceSpec> by_name(const std::string& name);
}  // namespace presets

/// Labeled DAG for one architecture. Adjacency is stored densely; a slot
/// holds 0 for "no edge", 1 for a plain edge and 1+op for edge-labeled
/// spaces. The type does not enforce triangularity so that arbitrary
/// decoder output and non-topological labelings can be represented;
/// check_validity and canonicalize establish the invariants.
class ArchGraph {
 public:
  ArchGraph() = default;
  explicit ArchGraph(std::vector<NodeTypeId> node_types, bool edge_labeled = false);

  static ArchGraph from_edges(std::vector<NodeTypeId> node_types,
                              const std::vector<std::pair<int, int>>& edges);

  int node_count() const { return static_cast<int>(types_.size()); }
  bool edge_labeled() const { return edge_labeled_; }
  NodeTypeId type(int v) const { return types_[v]; }
  const std::vector<NodeTypeId>& node_types() const { return types_; }

  bool has_edge(int from, int to) const { return slot(from, to) != 0; }
  /// Raw slot value (0 none, 1 plain, 1+op edge-labeled).
  int slot(int from, int to) const {
    return adj_[static_cast<std::size_t>(from) * types_.size() + to];
  }
  /// Op id of an edge in an edge-labeled graph.
  std::optional<int> edge_op(int from, int to) const;

  void set_edge(int from, int to);
  void set_edge_op(int from, int to, int op);
  void clear_edge(int from, int to);

  int edge_count() const;
  /// Edges sorted by (from, to).
  std::vector<std::pair<int, int>> edges() const;
  std::vector<int> predecessors(int v) const;
  std::vector<int> successors(int v) const;
  bool is_upper_triangular() const;

  friend bool operator==(const ArchGraph&, const ArchGraph&) = default;

 private:
  std::vector<NodeTypeId> types_;
  std::vector<std::int16_t> adj_;
  bool edge_labeled_ = false;
};

struct ValidityReport {
  bool is_valid = true;
  std::vector<std::string> violations;
};

/// Never throws for malformed graphs; every failed constraint is reported by
/// name ("max_edges", "dangling_node", ...).
ValidityReport check_validity(const ArchGraph& g, const SearchSpaceSpec& spec);

/// Same checks with the node-count bound relaxed to `max_nodes`; used when
/// expanding graphs beyond the space they were drawn from.
ValidityReport check_validity_relaxed(const ArchGraph& g, const SearchSpaceSpec& spec,
                                      int max_nodes, bool enforce_max_edges);

/// Nodes reachable from `source` following edges forwards (or backwards).
std::vector<bool> reachable_from(const ArchGraph& g, int source, bool backwards = false);

}  // namespace dagvae
