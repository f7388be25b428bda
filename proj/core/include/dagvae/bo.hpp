#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dagvae/gp.hpp"
#include "dagvae/graph.hpp"
#include "dagvae/model.hpp"
#include "dagvae/record.hpp"

namespace dagvae {

/// Accuracy lookup; nullopt means the architecture is not in the oracle.
using Oracle = std::function<std::optional<ArchMetrics>(const ArchGraph&)>;

/// Tabular oracle keyed by canonical form.
Oracle tabular_oracle(const std::vector<BenchRecord>& records);

struct BoConfig {
  int iterations = 10;
  int batch = 50;
  int initial = 0;       // random seed-set size when no seed set is given (0 = batch)
  int prior_samples = 0;  // decodes of fresh prior samples added to the pool per iteration
  GpConfig gp;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct BoHistoryRow {
  int iteration = 0;
  int evaluations = 0;
  double best_val = 0.0;
  double best_test = 0.0;
  double wallclock_s = 0.0;
};

struct Evaluation {
  ArchGraph graph;
  ArchMetrics metrics;
};

struct BoResult {
  std::vector<BoHistoryRow> history;  // row 0 is the seed set
  std::vector<Evaluation> evaluated;
  std::vector<std::string> oracle_misses;  // canonical hashes
  double best_val = 0.0;
  double best_test = 0.0;
};

/// Iteration 0 evaluates the seed set (or a random draw of `initial` pool
/// graphs); each later iteration fits the GP on (posterior mean, val_acc) of
/// everything evaluated, scores the unevaluated pool by EI and evaluates the
/// top batch. Candidates missing from the oracle are logged and skipped.
BoResult bo_loop(const Model& m, const Oracle& oracle, const std::vector<ArchGraph>& seed_set,
                 const std::vector<ArchGraph>& pool, const BoConfig& config);

/// Uniform draws without replacement from the pool at the same schedule
/// (initial draw, then `iterations` batches).
BoResult random_search(const Oracle& oracle, const std::vector<ArchGraph>& pool, const BoConfig& config);

/// iteration,evaluations_so_far,best_val,best_test,wallclock_s
void write_bo_history(const std::string& path, const std::vector<BoHistoryRow>& history);

}  // namespace dagvae
