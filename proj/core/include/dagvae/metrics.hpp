#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dagvae/graph.hpp"
#include "dagvae/model.hpp"

namespace dagvae {

/// Percent of decodes (n_z posterior samples, n_decode stochastic decodes
/// each) whose canonical form equals the input, averaged over graphs.
double reconstruction_accuracy(const Model& m, const std::vector<ArchGraph>& test, int n_z, int n_decode,
                               std::uint64_t seed, int threads = 0);

/// Percent of graphs recovered by greedy decoding of the posterior mean.
double greedy_reconstruction_accuracy(const Model& m, const std::vector<ArchGraph>& test, int threads = 0);

struct DecodeLogEntry {
  int z_index = 0;
  int decode_index = 0;
  ArchGraph graph;
  bool valid = false;
  std::string canonical_hash;
};

struct PriorMetrics {
  double validity = 0.0;
  std::optional<double> uniqueness;  // unset when nothing decoded is valid
  std::optional<double> novelty;
  std::size_t total = 0;
  std::size_t valid = 0;
};

/// Decodes n_decode stochastic samples from each of n_prior z ~ N(0, I).
/// Fills `log` when given.
PriorMetrics prior_metrics(const Model& m, const std::vector<ArchGraph>& training, int n_prior, int n_decode,
                           std::uint64_t seed, std::vector<DecodeLogEntry>* log = nullptr, int threads = 0);

/// Recount from a decode log, re-validating every logged graph.
PriorMetrics metrics_from_log(const std::vector<DecodeLogEntry>& log, const SearchSpaceSpec& spec,
                              const std::unordered_set<std::string>& training_hashes);

std::unordered_set<std::string> hash_set(const std::vector<ArchGraph>& graphs);

/// {"z_index":..,"decode_index":..,"graph":{...record...},"valid":..,"canonical_hash":".."}
void write_decode_log(const std::string& path, const std::vector<DecodeLogEntry>& log, const SearchSpaceSpec& spec);
std::vector<DecodeLogEntry> read_decode_log(const std::string& path, const SearchSpaceSpec& spec);

/// Percent of pairs whose embedding means are bitwise equal.
double iso_mapping_test(const Model& m, const std::vector<std::pair<ArchGraph, ArchGraph>>& pairs);

}  // namespace dagvae
