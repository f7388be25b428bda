#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dagvae/autodiff.hpp"
#include "dagvae/graph.hpp"
#include "dagvae/model.hpp"

namespace dagvae {

struct LabeledPoint {
  ArchGraph graph;
  double target = 0.0;
};

/// Regressor head on a latent vector (unclamped).
Var predictor_forward(Tape& t, const Model& m, Var z);
double predict(const Model& m, const Vector& z);
/// Encodes to the posterior mean first.
double predict_graph(const Model& m, const ArchGraph& g);

struct FineTuneConfig {
  int epochs = 100;
  int batch_size = 16;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct FineTuneReport {
  std::vector<double> train_mse;  // per epoch, measured after the epoch
  std::optional<double> val_mse;
};

/// Squared error of predict(mean(g)) against the target; only encoder and
/// predictor parameters move, with fresh optimizer state.
FineTuneReport fine_tune(Model& m, const std::vector<LabeledPoint>& train, const std::vector<LabeledPoint>& val,
                         const FineTuneConfig& config);

double mean_squared_error(const Model& m, const std::vector<LabeledPoint>& points, int threads = 0);

struct RankedCandidate {
  ArchGraph graph;  // canonical
  double prediction = 0.0;
  std::string canonical_hash;
};

/// Descending prediction, ties by canonical key; at most top_k entries.
std::vector<RankedCandidate> rank_candidates(const Model& m, const std::vector<ArchGraph>& candidates,
                                             std::size_t top_k, int threads = 0);

/// Rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace dagvae
