#include "dagvae/ingest.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "dagvae/canonical.hpp"
#include "dagvae/error.hpp"
#include "dagvae/rng.hpp"

namespace dagvae {

Dataset ingest_records(const std::vector<BenchRecord>& raw, const SearchSpaceSpec& spec, std::uint64_t seed) {
  Dataset d;
  std::map<GraphKey, BenchRecord> unique;
  for (const auto& r : raw) {
    ++d.report.read;
    if (!check_validity(r.graph, spec).is_valid) {
      ++d.report.invalid;
      continue;
    }
    const ArchGraph c = canonicalize(r.graph);
    auto [it, inserted] = unique.try_emplace(labeling_key(c), BenchRecord{c, r.metrics});
    if (!inserted) ++d.report.duplicates;
  }
  if (unique.empty()) throw Error(ErrorKind::EmptyDataset, "no valid records");
  for (auto& [k, r] : unique) d.kept.push_back(std::move(r));
  d.report.kept = d.kept.size();

  std::vector<std::size_t> idx(d.kept.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0x73706c6974));
  rng.shuffle(idx);
  const std::size_t n_val = d.kept.size() / 10;
  for (std::size_t i = 0; i < idx.size(); ++i) (i < n_val ? d.val : d.train).push_back(d.kept[idx[i]]);
  return d;
}

Dataset ingest(const std::string& path, const SearchSpaceSpec& spec, std::uint64_t seed) {
  return ingest_records(read_records(path, spec), spec, seed);
}

std::vector<ArchGraph> graphs_of(const std::vector<BenchRecord>& records) {
  std::vector<ArchGraph> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.graph);
  return out;
}

}  // namespace dagvae
