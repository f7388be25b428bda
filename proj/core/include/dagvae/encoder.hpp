#pragma once

#include <vector>

#include "dagvae/autodiff.hpp"
#include "dagvae/graph.hpp"
#include "dagvae/model.hpp"

namespace dagvae {

class Rng;

/// Posterior parameters: mean (h_G) and log of the diagonal variance.
struct GraphEmbedding {
  Vector mean;
  Vector log_var;
};

/// Directional node states of one round.
struct EncoderStates {
  std::vector<Var> fwd;
  std::vector<Var> bwd;
};

struct EncodedVars {
  Var mean;
  Var log_var;
};

/// Round-0 states: both directions take the node type's embedding column.
/// Throws UnknownOp for a node type or edge op outside the model's space.
EncoderStates init_node_states(Tape& t, const Model& model, const ArchGraph& g);

/// One synchronous round: forward aggregates over predecessors, backward over
/// successors, each direction updated by its own GRU.
EncoderStates propagate(Tape& t, const Model& model, const ArchGraph& g, const EncoderStates& s);

/// Gated-sum heads over concat(fwd, bwd) per node.
EncodedVars aggregate_graph(Tape& t, const Model& model, const EncoderStates& s);

EncodedVars encode_on_tape(Tape& t, const Model& model, const ArchGraph& g);
GraphEmbedding encode(const Model& model, const ArchGraph& g);

/// mean + exp(log_var / 2) * eps
Var reparameterize(Tape& t, const EncodedVars& e, const Vector& eps);
Vector reparam_sample(const GraphEmbedding& emb, Rng& rng);
Vector standard_normal(int dim, Rng& rng);

}  // namespace dagvae
