#include "dagvae/metrics.hpp"

#include <cstring>
#include <fstream>

#include "dagvae/canonical.hpp"
#include "dagvae/decoder.hpp"
#include "dagvae/encoder.hpp"
#include "dagvae/error.hpp"
#include "dagvae/parallel.hpp"
#include "dagvae/record.hpp"
#include "dagvae/rng.hpp"
#include "json.hpp"

namespace dagvae {

using ojson = nlohmann::ordered_json;

double reconstruction_accuracy(const Model& m, const std::vector<ArchGraph>& test, int n_z, int n_decode,
                               std::uint64_t seed, int threads) {
  if (test.empty()) return 0.0;
  std::vector<double> frac(test.size());
  parallel_for(
      test.size(),
      [&](std::size_t i) {
        const GraphKey key = canonical_key(test[i]);
        const GraphEmbedding emb = encode(m, test[i]);
        Rng rng(mix_seed(seed, i));
        int hits = 0;
        for (int a = 0; a < n_z; ++a) {
          const Vector z = reparam_sample(emb, rng);
          for (int b = 0; b < n_decode; ++b)
            if (labeling_key(decode(m, z, DecodeMode::Sample, rng)) == key) ++hits;
        }
        frac[i] = static_cast<double>(hits) / (n_z * n_decode);
      },
      threads);
  double s = 0.0;
  for (double f : frac) s += f;
  return 100.0 * s / static_cast<double>(test.size());
}

double greedy_reconstruction_accuracy(const Model& m, const std::vector<ArchGraph>& test, int threads) {
  if (test.empty()) return 0.0;
  std::vector<int> ok(test.size());
  parallel_for(
      test.size(),
      [&](std::size_t i) {
        Rng unused(0);
        const GraphEmbedding emb = encode(m, test[i]);
        ok[i] = labeling_key(decode(m, emb.mean, DecodeMode::Greedy, unused)) == canonical_key(test[i]);
      },
      threads);
  double s = 0.0;
  for (int v : ok) s += v;
  return 100.0 * s / static_cast<double>(test.size());
}

std::unordered_set<std::string> hash_set(const std::vector<ArchGraph>& graphs) {
  std::unordered_set<std::string> out;
  for (const auto& g : graphs) out.insert(canonical_hash(g));
  return out;
}

namespace {

PriorMetrics summarize(const std::vector<DecodeLogEntry>& log, const std::unordered_set<std::string>& training) {
  PriorMetrics r;
  r.total = log.size();
  std::unordered_set<std::string> distinct;
  std::size_t novel = 0;
  for (const auto& e : log) {
    if (!e.valid) continue;
    ++r.valid;
    distinct.insert(e.canonical_hash);
    if (training.count(e.canonical_hash) == 0) ++novel;
  }
  r.validity = r.total == 0 ? 0.0 : 100.0 * static_cast<double>(r.valid) / static_cast<double>(r.total);
  if (r.valid > 0) {
    r.uniqueness = 100.0 * static_cast<double>(distinct.size()) / static_cast<double>(r.valid);
    r.novelty = 100.0 * static_cast<double>(novel) / static_cast<double>(r.valid);
  }
  return r;
}

}  // namespace

PriorMetrics prior_metrics(const Model& m, const std::vector<ArchGraph>& training, int n_prior, int n_decode,
                           std::uint64_t seed, std::vector<DecodeLogEntry>* log, int threads) {
  std::vector<std::vector<DecodeLogEntry>> per_z(static_cast<std::size_t>(std::max(n_prior, 0)));
  parallel_for(
      per_z.size(),
      [&](std::size_t i) {
        Rng rng(mix_seed(seed, i));
        const Vector z = standard_normal(m.config().d_z, rng);
        for (int k = 0; k < n_decode; ++k) {
          DecodeLogEntry e;
          e.z_index = static_cast<int>(i);
          e.decode_index = k;
          e.graph = decode(m, z, DecodeMode::Sample, rng);
          e.valid = check_validity(e.graph, m.space()).is_valid;
          e.canonical_hash = canonical_hash(e.graph);
          per_z[i].push_back(std::move(e));
        }
      },
      threads);
  std::vector<DecodeLogEntry> flat;
  for (auto& v : per_z)
    for (auto& e : v) flat.push_back(std::move(e));
  PriorMetrics r = summarize(flat, hash_set(training));
  if (log) *log = std::move(flat);
  return r;
}

PriorMetrics metrics_from_log(const std::vector<DecodeLogEntry>& log, const SearchSpaceSpec& spec,
                              const std::unordered_set<std::string>& training_hashes) {
  std::vector<DecodeLogEntry> checked = log;
  for (auto& e : checked) {
    e.valid = check_validity(e.graph, spec).is_valid;
    e.canonical_hash = canonical_hash(e.graph);
  }
  return summarize(checked, training_hashes);
}

void write_decode_log(const std::string& path, const std::vector<DecodeLogEntry>& log, const SearchSpaceSpec& spec) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write '" + path + "'");
  for (const auto& e : log) {
    ojson j;
    j["z_index"] = e.z_index;
    j["decode_index"] = e.decode_index;
    j["graph"] = ojson::parse(serialize_graph(e.graph, spec));
    j["valid"] = e.valid;
    j["canonical_hash"] = e.canonical_hash;
    out << j.dump() << '\n';
  }
}

std::vector<DecodeLogEntry> read_decode_log(const std::string& path, const SearchSpaceSpec& spec) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::vector<DecodeLogEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      ojson j = ojson::parse(line);
      DecodeLogEntry e;
      e.z_index = j.at("z_index").get<int>();
      e.decode_index = j.at("decode_index").get<int>();
      e.graph = deserialize_record(j.at("graph").dump(), spec, line_no).graph;
      e.valid = j.at("valid").get<bool>();
      e.canonical_hash = j.at("canonical_hash").get<std::string>();
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

double iso_mapping_test(const Model& m, const std::vector<std::pair<ArchGraph, ArchGraph>>& pairs) {
  if (pairs.empty()) return 100.0;
  std::size_t same = 0;
  for (const auto& [a, b] : pairs) {
    const Vector ma = encode(m, a).mean, mb = encode(m, b).mean;
    if (ma.size() == mb.size() && std::memcmp(ma.data(), mb.data(), sizeof(double) * ma.size()) == 0) ++same;
  }
  return 100.0 * static_cast<double>(same) / static_cast<double>(pairs.size());
}

}  // namespace dagvae
