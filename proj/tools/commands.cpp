#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "dagvae/bo.hpp"
#include "dagvae/canonical.hpp"
#include "dagvae/encoder.hpp"
#include "dagvae/enumerate.hpp"
#include "dagvae/error.hpp"
#include "dagvae/explore.hpp"
#include "dagvae/ingest.hpp"
#include "dagvae/metrics.hpp"
#include "dagvae/pca.hpp"
#include "dagvae/predictor.hpp"
#include "dagvae/rng.hpp"
#include "dagvae/synth.hpp"
#include "dagvae/trainer.hpp"
#include "json.hpp"

namespace dagvae::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Streams split off the global seed, one per consumer.
enum Stream : std::uint64_t { kIngest = 1, kInit, kTrain, kMetrics, kFineTune, kBo, kCircle };

std::uint64_t seed_for(const ExperimentConfig& c, Stream s) { return mix_seed(*c.seed, s); }

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

const SearchSpaceSpec& need_space(const ExperimentConfig& c) {
  if (!c.space_given) bad("config needs 'space'");
  return c.space;
}

std::vector<BenchRecord> raw_records(const ExperimentConfig& c, const SearchSpaceSpec& spec) {
  if (c.data.records) return read_records(c.data.records->string(), spec);
  if (c.data.fixture) return build_fixture(spec, *c.data.fixture);
  bad("config needs 'data'");
}

Dataset load_data(const ExperimentConfig& c, const SearchSpaceSpec& spec) {
  return ingest_records(raw_records(c, spec), spec, seed_for(c, kIngest));
}

Model load_model(const ExperimentConfig& c) {
  if (!c.checkpoint) bad("config needs 'checkpoint'");
  Model m = load_checkpoint(c.checkpoint->string());
  if (c.space_given && !(c.space == m.space())) bad("config space differs from the checkpoint's space");
  return m;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write '" + p.string() + "'");
  out << std::setprecision(17);
  return out;
}

void write_json(const fs::path& p, const ojson& j) { open_out(p) << j.dump(2) << '\n'; }

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

// ---------------------------------------------------------------------------

void build_fixture_cmd(const ExperimentConfig& c, const fs::path& out) {
  const SearchSpaceSpec& spec = need_space(c);
  if (!c.data.fixture) bad("build-fixture needs data.fixture");
  const auto records = build_fixture(spec, *c.data.fixture);
  write_records((out / "fixture.jsonl").string(), records, spec);
  std::cout << "fixture: " << records.size() << " graphs (" << c.data.fixture->name << ")\n";
}

void ingest_cmd(const ExperimentConfig& c, const fs::path& out) {
  const SearchSpaceSpec& spec = need_space(c);
  Dataset d = load_data(c, spec);
  write_records((out / "kept.jsonl").string(), d.kept, spec);
  write_records((out / "train.jsonl").string(), d.train, spec);
  write_records((out / "val.jsonl").string(), d.val, spec);
  ojson r;
  r["read"] = d.report.read;
  r["invalid"] = d.report.invalid;
  r["duplicates"] = d.report.duplicates;
  r["kept"] = d.report.kept;
  r["train"] = d.train.size();
  r["val"] = d.val.size();
  write_json(out / "ingest_report.json", r);
  std::cout << "ingest: read " << d.report.read << ", invalid " << d.report.invalid << ", duplicates "
            << d.report.duplicates << ", kept " << d.report.kept << '\n';
}

void train_cmd(const ExperimentConfig& c, const fs::path& out) {
  const SearchSpaceSpec& spec = need_space(c);
  Dataset d = load_data(c, spec);
  Model m(spec, c.model, seed_for(c, kInit));
  TrainConfig tc = c.train;
  tc.seed = seed_for(c, kTrain);
  tc.checkpoint_path = (out / "checkpoint.json").string();
  auto curve = train(m, graphs_of(d.train), tc, [&](int epoch, const LossBreakdown& l) {
    if ((epoch + 1) % 25 == 0 || epoch + 1 == tc.epochs)
      std::cerr << "epoch " << epoch + 1 << " loss " << l.total << " (rec " << l.reconstruction() << ", kl "
                << l.kl << ")\n";
  });
  save_checkpoint(m, (out / "checkpoint.json").string());
  write_loss_csv((out / "loss.csv").string(), curve);
  std::cout << "train: " << d.train.size() << " graphs, " << curve.size() << " epochs";
  if (!curve.empty()) std::cout << ", final loss " << curve.back().total;
  std::cout << '\n';
}

void eval_abilities_cmd(const ExperimentConfig& c, const fs::path& out) {
  Model m = load_model(c);
  Dataset d = load_data(c, m.space());
  const auto test = graphs_of(d.val.empty() ? d.train : d.val);
  const auto& p = c.metrics;
  const double acc = reconstruction_accuracy(m, test, p.n_z, p.n_decode, seed_for(c, kMetrics));
  const double greedy = greedy_reconstruction_accuracy(m, test);
  std::vector<DecodeLogEntry> log;
  const PriorMetrics pm =
      prior_metrics(m, graphs_of(d.train), p.n_prior, p.n_prior_decode, mix_seed(seed_for(c, kMetrics), 1), &log);
  write_decode_log((out / "decode_log.jsonl").string(), log, m.space());
  ojson r;
  r["accuracy"] = acc;
  r["greedy_accuracy"] = greedy;
  r["validity"] = pm.validity;
  r["uniqueness"] = optional_number(pm.uniqueness);
  r["novelty"] = optional_number(pm.novelty);
  r["counts"] = {{"test_graphs", test.size()}, {"prior_total", pm.total}, {"prior_valid", pm.valid}};
  r["protocol"] = {{"n_z", p.n_z}, {"n_decode", p.n_decode}, {"n_prior", p.n_prior},
                   {"n_prior_decode", p.n_prior_decode}};
  write_json(out / "abilities.json", r);
  std::cout << "accuracy " << acc << " greedy " << greedy << " validity " << pm.validity;
  if (pm.uniqueness) std::cout << " uniqueness " << *pm.uniqueness << " novelty " << *pm.novelty;
  std::cout << '\n';
}

std::vector<LabeledPoint> labeled(const std::vector<BenchRecord>& records) {
  std::vector<LabeledPoint> out;
  for (const auto& r : records)
    if (r.metrics) out.push_back({r.graph, r.metrics->val_acc});
  return out;
}

void finetune_cmd(const ExperimentConfig& c, const fs::path& out) {
  Model m = load_model(c);
  Dataset d = load_data(c, m.space());
  std::vector<LabeledPoint> pool = labeled(d.train), val = labeled(d.val);
  if (pool.empty()) throw Error(ErrorKind::EmptyDataset, "finetune-predict: training split has no metrics");
  Rng rng(seed_for(c, kFineTune));
  rng.shuffle(pool);
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(c.finetune.fraction * pool.size())));
  pool.resize(std::min(n, pool.size()));
  FineTuneConfig fc = c.finetune.tune;
  fc.seed = mix_seed(seed_for(c, kFineTune), 1);
  FineTuneReport rep = fine_tune(m, pool, val, fc);
  save_checkpoint(m, (out / "predictor.json").string());
  ojson r;
  r["labeled"] = pool.size();
  r["held_out"] = val.size();
  r["train_mse"] = rep.train_mse;
  r["val_mse"] = optional_number(rep.val_mse);
  std::optional<double> rho;
  if (val.size() >= 2) {
    std::vector<double> pred, truth;
    for (const auto& p : val) {
      pred.push_back(predict_graph(m, p.graph));
      truth.push_back(p.target);
    }
    rho = spearman(pred, truth);
  }
  r["val_spearman"] = optional_number(rho);
  write_json(out / "finetune_report.json", r);
  std::cout << "finetune: " << pool.size() << " labeled, final train mse "
            << (rep.train_mse.empty() ? 0.0 : rep.train_mse.back());
  if (rep.val_mse) std::cout << ", val mse " << *rep.val_mse;
  if (rho) std::cout << ", val spearman " << *rho;
  std::cout << '\n';
}

void bo_cmd(const ExperimentConfig& c, const fs::path& out) {
  Model m = load_model(c);
  Dataset d = load_data(c, m.space());
  const Oracle oracle = tabular_oracle(d.kept);
  BoConfig bc = c.bo.bo;
  bc.seed = seed_for(c, kBo);
  BoResult r = bo_loop(m, oracle, {}, graphs_of(d.kept), bc);
  write_bo_history((out / "bo_history.csv").string(), r.history);
  ojson s;
  s["best_val"] = r.best_val;
  s["best_test"] = r.best_test;
  s["evaluations"] = r.evaluated.size();
  s["oracle_misses"] = r.oracle_misses;
  if (c.bo.baseline) {
    BoResult rs = random_search(oracle, graphs_of(d.kept), bc);
    write_bo_history((out / "random_history.csv").string(), rs.history);
    s["random_best_val"] = rs.best_val;
    s["random_best_test"] = rs.best_test;
  }
  write_json(out / "bo_summary.json", s);
  std::cout << "bo: best val " << r.best_val << " (test " << r.best_test << ") after " << r.evaluated.size()
            << " evaluations\n";
}

void extrapolate_cmd(const ExperimentConfig& c, const fs::path& out) {
  Model m = load_model(c);
  const SearchSpaceSpec& spec = m.space();
  ArchGraph seed_graph;
  if (c.extrapolate.seed_graph) {
    seed_graph = canonicalize(c.extrapolate.seed_graph->graph);
  } else {
    Dataset d = load_data(c, spec);
    const BenchRecord* best = nullptr;
    for (const auto& r : d.kept)
      if (r.metrics && (!best || r.metrics->val_acc > best->metrics->val_acc)) best = &r;
    if (!best) throw Error(ErrorKind::EmptyDataset, "extrapolate: no labeled graph to expand");
    seed_graph = best->graph;
  }
  const auto candidates = expand_graph(seed_graph, seed_graph.node_count() + 1, spec);
  const auto ranked = rank_candidates(m, candidates, c.extrapolate.top_k);
  SearchSpaceSpec wide = spec;
  wide.max_nodes = std::max(spec.max_nodes, seed_graph.node_count() + 1);
  wide.max_edges.reset();
  auto csv = open_out(out / "extrapolation.csv");
  csv << "rank,canonical_hash,prediction,true_acc\n";
  auto jl = open_out(out / "extrapolation.jsonl");
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    csv << i + 1 << ',' << ranked[i].canonical_hash << ',' << ranked[i].prediction << ',';
    if (c.data.fixture) csv << eval_target(*c.data.fixture, ranked[i].graph, spec);
    csv << '\n';
    jl << serialize_graph(ranked[i].graph, wide) << '\n';
  }
  std::cout << "extrapolate: " << candidates.size() << " candidates from a " << seed_graph.node_count()
            << "-node seed, wrote top " << ranked.size() << '\n';
}

void project_latent_cmd(const ExperimentConfig& c, const fs::path& out) {
  Model m = load_model(c);
  Dataset d = load_data(c, m.space());
  std::vector<Vector> z(d.kept.size());
  for (std::size_t i = 0; i < d.kept.size(); ++i) z[i] = encode(m, d.kept[i].graph).mean;
  const PcaResult p = pca_project(z, 2);
  auto csv = open_out(out / "latent_pca.csv");
  csv << "canonical_hash,pc1,pc2,true_acc\n";
  for (std::size_t i = 0; i < d.kept.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    csv << canonical_hash(d.kept[i].graph) << ',' << p.projections(row, 0) << ',' << p.projections(row, 1) << ',';
    if (d.kept[i].metrics) csv << d.kept[i].metrics->val_acc;
    csv << '\n';
  }
  std::cout << "project-latent: " << d.kept.size() << " points, variances " << p.variances(0) << ", "
            << p.variances(1) << '\n';
}

void circle_walk_cmd(const ExperimentConfig& c, const fs::path& out) {
  Model m = load_model(c);
  const auto walk = circle_walk(m, c.circle.n, c.circle.radius, seed_for(c, kCircle));
  auto jl = open_out(out / "circle_walk.jsonl");
  int valid = 0;
  for (std::size_t i = 0; i < walk.size(); ++i) {
    const bool ok = check_validity(walk[i].graph, m.space()).is_valid;
    valid += ok;
    ojson line;
    line["index"] = i;
    line["z"] = std::vector<double>(walk[i].z.data(), walk[i].z.data() + walk[i].z.size());
    line["valid"] = ok;
    line["canonical_hash"] = canonical_hash(walk[i].graph);
    line["graph"] = ojson::parse(serialize_graph(walk[i].graph, m.space()));
    jl << line.dump() << '\n';
  }
  std::cout << "circle-walk: " << walk.size() << " points, " << valid << " valid\n";
}

}  // namespace

const std::vector<Command>& commands() {
  static const std::vector<Command> all = {
      {"train", "Train the autoencoder; writes checkpoint.json and loss.csv", train_cmd},
      {"eval-abilities", "Reconstruction, validity, uniqueness, novelty; writes abilities.json and decode_log.jsonl",
       eval_abilities_cmd},
      {"finetune-predict", "Fine-tune the accuracy regressor; writes predictor.json and finetune_report.json",
       finetune_cmd},
      {"bo", "Bayesian optimization over the encoded pool; writes bo_history.csv and bo_summary.json", bo_cmd},
      {"extrapolate", "Rank one-node expansions of a seed cell; writes extrapolation.csv/.jsonl", extrapolate_cmd},
      {"project-latent", "First two principal components of the latent means; writes latent_pca.csv",
       project_latent_cmd},
      {"circle-walk", "Greedy decodes along a latent great circle; writes circle_walk.jsonl", circle_walk_cmd},
      {"build-fixture", "Enumerate the space with a synthetic target; writes fixture.jsonl", build_fixture_cmd},
      {"ingest", "Canonicalize, validate, dedup and split records; writes ingest_report.json and splits",
       ingest_cmd},
  };
  return all;
}

}  // namespace dagvae::cli
