#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dagvae/graph.hpp"
#include "dagvae/record.hpp"

namespace dagvae {

struct IngestReport {
  std::size_t read = 0;
  std::size_t invalid = 0;
  std::size_t duplicates = 0;
  std::size_t kept = 0;
};

struct Dataset {
  std::vector<BenchRecord> kept;  // canonical, sorted by canonical key
  std::vector<BenchRecord> train;
  std::vector<BenchRecord> val;
  IngestReport report;
};

/// Canonicalizes, validates and dedups (first occurrence wins), then splits
/// kept records 90/10 by a seeded shuffle. Throws EmptyDataset.
Dataset ingest_records(const std::vector<BenchRecord>& raw, const SearchSpaceSpec& spec, std::uint64_t seed);
Dataset ingest(const std::string& path, const SearchSpaceSpec& spec, std::uint64_t seed);

std::vector<ArchGraph> graphs_of(const std::vector<BenchRecord>& records);

}  // namespace dagvae
