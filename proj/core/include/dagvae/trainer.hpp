#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dagvae/autodiff.hpp"
#include "dagvae/decoder.hpp"
#include "dagvae/encoder.hpp"
#include "dagvae/graph.hpp"
#include "dagvae/model.hpp"
#include "dagvae/params.hpp"

namespace dagvae {

struct LossBreakdown {
  double node_fwd = 0.0;
  double edge_fwd = 0.0;
  double node_bwd = 0.0;
  double edge_bwd = 0.0;
  double kl = 0.0;
  double total = 0.0;
  double alpha = 0.005;

  double reconstruction() const { return node_fwd + edge_fwd + node_bwd + edge_bwd; }
};

struct TrainConfig {
  int epochs = 300;
  int batch_size = 32;
  double lr = 1e-3;
  double alpha = 0.005;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;  // epochs; 0 disables periodic checkpoints
  std::string checkpoint_path;
  int threads = 0;  // 0 = worker_threads()

  void validate() const;
};

/// 0.5 * sum(mean^2 + exp(log_var) - log_var - 1)
double kl_divergence(const GraphEmbedding& emb);
Var kl_divergence(Tape& t, const EncodedVars& e);

struct ReconstructionVars {
  DirectionalLoss fwd;
  DirectionalLoss bwd;
};

/// Teacher-forced reconstruction of canonical `g` from z, both directions.
ReconstructionVars reconstruction_loss(Tape& t, const Model& m, const ArchGraph& g, Var z);

struct GraphLoss {
  Var total;
  LossBreakdown parts;
};

/// rec + alpha * KL for one graph with reparameterization noise eps.
GraphLoss graph_loss(Tape& t, const Model& m, const ArchGraph& g, const Vector& eps, double alpha);

/// Reparameterization noise for graph slot `index` of `epoch`; independent of
/// batching and thread count.
Vector training_noise(std::uint64_t seed, int epoch, std::size_t index, int d_z);

using EpochCallback = std::function<void(int epoch, const LossBreakdown& mean)>;

/// Adam on the batch-mean loss; returns per-epoch mean losses. Graph order is
/// reshuffled each epoch from the seed.
std::vector<LossBreakdown> train(Model& m, const std::vector<ArchGraph>& dataset, const TrainConfig& config,
                                 const EpochCallback& on_epoch = {});

/// epoch,node_fwd,edge_fwd,node_bwd,edge_bwd,kl,total
void write_loss_csv(const std::string& path, const std::vector<LossBreakdown>& curve);

/// Runs fn(i) into per-item gradient lists on parallel tapes, then folds them
/// into the registry in index order scaled by `scale`.
using TapeLossFn = std::function<Var(Tape&, std::size_t)>;
std::vector<double> accumulate_batch(ParamRegistry& params, std::size_t count, const TapeLossFn& fn,
                                     double scale, int threads);

}  // namespace dagvae
