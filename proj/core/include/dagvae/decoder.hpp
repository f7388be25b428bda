#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dagvae/autodiff.hpp"
#include "dagvae/graph.hpp"
#include "dagvae/model.hpp"

namespace dagvae {

class Rng;

enum class DecodeMode { Greedy, Sample };
enum class Direction { Forward = 0, Backward = 1 };

struct DecodeStep {
  Vector type_logits;
  int type_choice = 0;  // index into type_logits
  NodeTypeId type = 0;
  bool forced = false;  // end type imposed by the step limit
  std::vector<Vector> edge_logits;  // one per prior node
  std::vector<int> edge_choices;    // 0 none, 1 edge (or 1 + op for edge-labeled spaces)
};

struct DecodeTrace {
  std::vector<DecodeStep> steps;
  bool truncated = false;

  int node_decisions() const { return static_cast<int>(steps.size()); }
  int edge_decisions() const;
};

/// A graph read in one decoding direction: node i of the backward sequence
/// is node (n-1-i) of the graph and every edge is reversed, so local edges
/// always run from an earlier to a later position.
struct DirectionalSequence {
  std::vector<NodeTypeId> types;
  std::vector<std::vector<int>> edge_choices;  // [t][j] for j < t, same coding as DecodeStep
};

NodeTypeId start_type(const SearchSpaceSpec& s, Direction d);
NodeTypeId end_type(const SearchSpaceSpec& s, Direction d);
/// add_node index of a type (interior types first, then the end type); -1 if not decodable.
int type_to_choice(const SearchSpaceSpec& s, Direction d, NodeTypeId type);
NodeTypeId choice_to_type(const SearchSpaceSpec& s, Direction d, int choice);

DirectionalSequence directional_sequence(const ArchGraph& g, Direction d);
/// Local fragment (decode order) back to a graph in the original orientation.
ArchGraph orient_fragment(const ArchGraph& fragment, Direction d);

/// Greedy: argmax with the lowest index winning ties. Sample: softmax draw.
int choose_type(const Vector& logits, DecodeMode mode, Rng& rng);
/// Node-labeled (one logit): greedy takes the edge iff sigmoid(logit) > 0.5,
/// sampling draws Bernoulli(sigmoid). Edge-labeled: categorical over
/// [no edge, op 0, op 1, ...] with the same rules as choose_type.
int choose_edge(const Vector& logits, DecodeMode mode, Rng& rng);

// Network pieces, recorded on a tape.
Var init_start_node(Tape& t, const Model& m, Direction d, Var z, NodeTypeId type);
Var init_node(Tape& t, const Model& m, Direction d, Var z, Var h_graph, NodeTypeId type);
Var add_node_logits(Tape& t, const Model& m, Direction d, Var z, Var h_graph);
std::vector<Var> add_edge_logits(Tape& t, const Model& m, Direction d, Var h_new,
                                 std::span<const Var> prior, Var h_graph, Var z);

struct DirectionalLoss {
  Var node;  // summed cross-entropy of add_node decisions
  Var edge;  // summed cross-entropy of add_edges decisions
  int node_decisions = 0;
  int edge_decisions = 0;
};

/// Teacher-forced pass over `g` (canonical) in direction d.
DirectionalLoss directional_loss(Tape& t, const Model& m, Var z, const ArchGraph& g, Direction d,
                                 DecodeTrace* trace = nullptr);

/// Free-running decode. max_steps <= 0 selects the model default
/// (2 * max_nodes); reaching it appends the end type. Returns the fragment
/// in local decode order plus the trace.
std::pair<ArchGraph, DecodeTrace> decode_directional(const Model& m, const Vector& z, Direction d,
                                                     DecodeMode mode, Rng& rng, int max_steps = 0);

/// Union of a forward fragment and a backward fragment (local order). Equal
/// node counts align forward i with backward n-1-i, take forward types and
/// both edge sets (forward op wins); otherwise the forward fragment alone.
/// The result is not canonicalized.
ArchGraph union_fragments(const ArchGraph& forward, const ArchGraph& backward_local);

/// Forward and backward decode, union, canonical form.
ArchGraph decode(const Model& m, const Vector& z, DecodeMode mode, Rng& rng, int max_steps = 0);

}  // namespace dagvae
