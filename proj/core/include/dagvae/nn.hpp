#pragma once

#include <span>
#include <vector>

#include "dagvae/autodiff.hpp"
#include "dagvae/model.hpp"

namespace dagvae {

/// w x + b
Var linear(Tape& t, const Linear& l, Var x);
GruVars gru_vars(Tape& t, const GruIndices& g);

/// Sum of messages m(u -> v) over `neighbors`, computed as
///   w_src * S(h_u) + deg * (w_dst h_v + b) + w_edge * S(e_uv)
/// with S the order-independent sum, which is exact for fc messages. An empty
/// neighborhood gives the zero vector. `edge_embeds` is empty for node-labeled
/// spaces and otherwise parallel to `neighbors`.
Var aggregate_messages(Tape& t, const MessageIndices& m, Var self, std::span<const Var> neighbors,
                       std::span<const Var> edge_embeds);

/// sum_v sigmoid(phi h_v) * psi h_v, order independent.
Var gated_sum(Tape& t, const GatedSumIndices& g, std::span<const Var> states);

}  // namespace dagvae
