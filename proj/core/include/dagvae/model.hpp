#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dagvae/graph.hpp"
#include "dagvae/params.hpp"

namespace dagvae {

struct ModelConfig {
  int d_node = 125;  // per direction; the concatenated node state is 2 * d_node
  int d_z = 56;
  int d_hidden = 125;  // hidden width of the decoder's two-layer fc blocks
  int rounds = 2;
  std::vector<int> predictor_widths{128, 128, 64};

  /// Throws ConfigError on non-positive sizes.
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Registry indices of one fc layer: y = w x + b.
struct Linear {
  int w = -1;
  int b = -1;
};

struct GruIndices {
  int w_z = -1, u_z = -1, b_z = -1;
  int w_r = -1, u_r = -1, b_r = -1;
  int w_n = -1, u_n = -1, b_n = -1;
};

/// m(u -> v) = w_src h_u + w_dst h_v + b (+ w_edge e_uv for edge-labeled spaces).
struct MessageIndices {
  int w_src = -1;
  int w_dst = -1;
  int b = -1;
  int w_edge = -1;
};

/// sum_v sigmoid(phi h_v) * psi h_v
struct GatedSumIndices {
  Linear phi;
  Linear psi;
};

struct EncoderLayout {
  int node_embed = -1;  // d_node x num_node_types
  int edge_embed = -1;  // d_node x num_ops, edge-labeled spaces only
  MessageIndices msg[2];  // [0] forward, [1] backward
  GruIndices gru[2];
  GatedSumIndices mean_head;
  GatedSumIndices logvar_head;
};

struct DecoderLayout {
  int node_embed = -1;  // L_d, d_node x num_node_types
  int edge_embed = -1;
  Linear init_start[2];  // (z, L_d[start]) -> hidden -> d_node
  Linear init[2];        // (z, h_G, L_d[type]) -> hidden -> d_node
  Linear add_node[2];    // (z, h_G) -> hidden -> type logits
  // add_edges first layer split by argument: w_new h_t + w_prior h_j + w_ctx [h_G; z] + b
  int edge_w_new = -1, edge_w_prior = -1, edge_w_ctx = -1, edge_b = -1;
  Linear edge_out;
  MessageIndices msg_in;
  MessageIndices msg_out;
  GruIndices gru;
  GatedSumIndices graph_head;
};

struct PredictorLayout {
  std::vector<Linear> layers;
};

/// Search space, sizes and every learnable table of encoder, both directional
/// decoders and the regressor head.
class Model {
 public:
  Model(SearchSpaceSpec space, ModelConfig config, std::uint64_t seed);

  const SearchSpaceSpec& space() const { return space_; }
  const ModelConfig& config() const { return config_; }
  ParamRegistry& params() { return params_; }
  const ParamRegistry& params() const { return params_; }

  const EncoderLayout& encoder() const { return enc_; }
  /// 0 forward, 1 backward
  const DecoderLayout& decoder(int direction) const { return dec_[direction]; }
  const PredictorLayout& predictor() const { return pred_; }

  /// Logits of add_node: one per interior type then the direction's end type.
  int node_choice_count() const { return space_.num_interior_types() + 1; }
  /// Outputs of add_edges per candidate: 1 Bernoulli logit, or "no edge" + ops.
  int edge_choice_count() const { return space_.edge_labeled() ? space_.num_ops() + 1 : 1; }
  int default_max_steps() const { return 2 * space_.max_nodes; }

  /// Registry indices of encoder and predictor parameters.
  std::vector<int> encoder_and_predictor_params() const;

 private:
  void build(std::uint64_t seed);

  SearchSpaceSpec space_;
  ModelConfig config_;
  ParamRegistry params_;
  EncoderLayout enc_;
  DecoderLayout dec_[2];
  PredictorLayout pred_;
};

/// JSON checkpoint: header {"format":"dagvae-checkpoint","version":1}, space,
/// model config, Adam step count and every parameter with its row-major
/// values and Adam moments.
void save_checkpoint(const Model& model, const std::string& path);
/// Throws MissingCheckpoint when the file is absent, ParseError when malformed.
Model load_checkpoint(const std::string& path);

}  // namespace dagvae
