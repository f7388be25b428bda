#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dagvae/bo.hpp"
#include "dagvae/graph.hpp"
#include "dagvae/model.hpp"
#include "dagvae/predictor.hpp"
#include "dagvae/record.hpp"
#include "dagvae/synth.hpp"
#include "dagvae/trainer.hpp"

namespace dagvae::cli {

/// Where labeled graphs come from: a JSON-lines file or a synthetic fixture
/// over the (enumerable) space.
struct DataSource {
  std::optional<std::filesystem::path> records;
  std::optional<SyntheticTarget> fixture;
};

struct MetricProtocol {
  int n_z = 10;
  int n_decode = 1;
  int n_prior = 1000;
  int n_prior_decode = 10;
};

struct FineTuneSection {
  FineTuneConfig tune;
  double fraction = 0.1;  // share of the training split that gets labels
};

struct ExtrapolateSection {
  std::optional<BenchRecord> seed_graph;  // default: best labeled graph
  std::size_t top_k = 10;
};

struct CircleSection {
  int n = 14;
  double radius = 1.0;
};

struct BoSection {
  BoConfig bo;
  bool baseline = true;  // also run random search at the same budget
};

struct ExperimentConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this
  std::optional<std::uint64_t> seed;  // mandatory once --seed is applied
  SearchSpaceSpec space;
  bool space_given = false;
  DataSource data;
  ModelConfig model;
  TrainConfig train;
  std::optional<std::filesystem::path> checkpoint;
  MetricProtocol metrics;
  FineTuneSection finetune;
  BoSection bo;
  ExtrapolateSection extrapolate;
  CircleSection circle;
};

/// Parses the JSON document at `path`. Throws ConfigError on malformed JSON,
/// unknown keys, wrong types or missing referenced files.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace dagvae::cli
