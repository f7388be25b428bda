// End-to-end acceptance run. One PASS/FAIL line per criterion; exit status 1
// when any criterion fails. Usage: acceptance <path-to-dagvae-cli> [work-dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

#include "dagvae/autodiff.hpp"
#include "dagvae/bo.hpp"
#include "dagvae/canonical.hpp"
#include "dagvae/encoder.hpp"
#include "dagvae/enumerate.hpp"
#include "dagvae/gp.hpp"
#include "dagvae/gradcheck.hpp"
#include "dagvae/ingest.hpp"
#include "dagvae/metrics.hpp"
#include "dagvae/params.hpp"
#include "dagvae/predictor.hpp"
#include "dagvae/rng.hpp"
#include "dagvae/synth.hpp"
#include "dagvae/trainer.hpp"

namespace fs = std::filesystem;
using namespace dagvae;

namespace {

// Thresholds.
constexpr double kGradTol = 1e-4;
constexpr int kIsoPairs = 500;
constexpr int kKlPosteriors = 50;
constexpr int kKlSamples = 100'000;
constexpr double kSeBound = 3.0;
constexpr double kMinStochastic = 90.0;
constexpr double kMinGreedy = 99.0;
constexpr double kMinValidity = 95.0;
constexpr std::size_t kNb201Size = 15'625;
constexpr std::size_t kReferenceExpansion = 1'384;
constexpr double kMinSpearman = 0.8;
constexpr int kTopTrials = 20;
constexpr int kMinTopHits = 12;  // 60% of 20
constexpr int kEiTriples = 100;
constexpr int kEiSamples = 1'000'000;
constexpr int kGpProblems = 20;
constexpr double kGpTol = 1e-6;
constexpr int kBoTrials = 10;
constexpr double kOneMinute = 60.0, kFiveMinutes = 300.0, kTenMinutes = 600.0, kTwentyMinutes = 1200.0,
                 kHalfHour = 1800.0;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 2.0 * rng.uniform() - 1.0;
  return m;
}

// Desk-scale training setup shared by several criteria.
struct Desk {
  SearchSpaceSpec spec = presets::mini();
  std::vector<BenchRecord> fixture;
  Dataset data;
  std::optional<Model> model;
  std::vector<LossBreakdown> curve;
  double train_seconds = 0.0;
};

ModelConfig desk_model_config() {
  ModelConfig c;
  c.d_node = 32;
  c.d_z = 16;
  c.d_hidden = 64;
  c.predictor_widths = {64, 64, 32};
  return c;
}

Desk& desk() {
  static Desk d = [] {
    Desk d;
    d.fixture = build_fixture(d.spec, depth_target());
    d.data = ingest_records(d.fixture, d.spec, 7);
    return d;
  }();
  return d;
}

const Model& trained_model() {
  Desk& d = desk();
  if (!d.model) {
    Model m(d.spec, desk_model_config(), 1);
    TrainConfig tc;
    tc.epochs = 300;
    tc.batch_size = 32;
    tc.lr = 1e-3;
    tc.seed = 3;
    const auto t0 = Clock::now();
    d.curve = train(m, graphs_of(d.data.train), tc);
    d.train_seconds = since(t0);
    d.model.emplace(std::move(m));
  }
  return *d.model;
}

// 1. Gradients of every primitive and of the full loss on a 4-node graph.
Outcome gradient_integrity() {
  Rng rng(4);
  ParamRegistry reg;
  reg.add("a", random_matrix(3, 4, rng));
  reg.add("x", random_matrix(4, 1, rng));
  reg.add("b", random_matrix(3, 1, rng));
  reg.add("c", random_matrix(3, 1, rng));
  reg.add("table", random_matrix(3, 5, rng));
  for (const char* gate : {"z", "r", "n"}) {
    reg.add(std::string("w_") + gate, random_matrix(3, 3, rng));
    reg.add(std::string("u_") + gate, random_matrix(3, 3, rng));
    reg.add(std::string("b_") + gate, random_matrix(3, 1, rng));
  }
  const Matrix w = random_matrix(3, 1, rng);
  auto gru = [](Tape& t) {
    GruVars g;
    g.w_z = t.param("w_z"), g.u_z = t.param("u_z"), g.b_z = t.param("b_z");
    g.w_r = t.param("w_r"), g.u_r = t.param("u_r"), g.b_r = t.param("b_r");
    g.w_n = t.param("w_n"), g.u_n = t.param("u_n"), g.b_n = t.param("b_n");
    return g;
  };
  auto weigh = [&](Tape& t, Var v) { return sum(hadamard(v, t.constant(w))); };
  std::vector<std::pair<std::string, LossFn>> cases{
      {"matmul", [&](Tape& t) { return weigh(t, matmul(t.param("a"), t.param("x"))); }},
      {"affine", [&](Tape& t) { return weigh(t, affine(t.param("a"), t.param("x"), t.param("b"))); }},
      {"add", [&](Tape& t) { return weigh(t, add(t.param("b"), t.param("c"))); }},
      {"sub", [&](Tape& t) { return weigh(t, sub(t.param("b"), t.param("c"))); }},
      {"scale", [&](Tape& t) { return weigh(t, scale(t.param("b"), -1.7)); }},
      {"hadamard", [&](Tape& t) { return weigh(t, hadamard(t.param("b"), t.param("c"))); }},
      {"concat_rows",
       [&](Tape& t) {
         Var v = concat_rows({t.param("b"), t.param("x")});
         return sum(hadamard(v, v));
       }},
      {"row_sum", [&](Tape& t) { return weigh(t, row_sum(hadamard(t.param("a"), t.param("a")))); }},
      {"sum_ordered",
       [&](Tape& t) {
         std::vector<Var> terms{t.param("b"), t.param("c"), hadamard(t.param("b"), t.param("c"))};
         return weigh(t, sum_ordered(terms));
       }},
      {"lookup_column", [&](Tape& t) { return weigh(t, lookup_column(t.param("table"), 2)); }},
      {"sigmoid", [&](Tape& t) { return weigh(t, sigmoid(t.param("b"))); }},
      {"relu", [&](Tape& t) { return weigh(t, relu(t.param("b"))); }},
      {"tanh", [&](Tape& t) { return weigh(t, tanh(t.param("b"))); }},
      {"exp", [&](Tape& t) { return weigh(t, exp(t.param("b"))); }},
      {"log", [&](Tape& t) { return weigh(t, log(exp(t.param("b")))); }},
      {"softmax_cross_entropy", [&](Tape& t) { return softmax_cross_entropy(t.param("b"), 1); }},
      {"bernoulli_bce",
       [&](Tape& t) {
         Var s = sum(hadamard(t.param("b"), t.constant(w)));
         return add(bernoulli_bce(s, 1.0), bernoulli_bce(scale(s, 0.5), 0.0));
       }},
      {"gru_cell", [&](Tape& t) { return weigh(t, gru_cell(t.param("c"), t.param("b"), gru(t))); }},
  };

  const auto t0 = Clock::now();
  GradCheckOptions opt;
  opt.tolerance = kGradTol;
  double worst = 0.0;
  std::string failed;
  for (auto& [name, f] : cases) {
    GradCheckReport r = grad_check(f, reg, opt);
    worst = std::max(worst, r.max_rel_error);
    if (!r.passed) failed += " " + name;
  }

  // Full loss, every entry of every parameter.
  ModelConfig small;
  small.d_node = 6;
  small.d_z = 4;
  small.d_hidden = 8;
  small.predictor_widths = {4, 4, 3};
  Model m(presets::nb101_like(), small, 5);
  const ArchGraph g = canonicalize(ArchGraph::from_edges({0, 2, 3, 4}, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}));
  const Vector eps = standard_normal(small.d_z, rng);
  GradCheckReport full = grad_check([&](Tape& t) { return graph_loss(t, m, g, eps, 0.005).total; }, m.params(), opt);
  worst = std::max(worst, full.max_rel_error);
  if (!full.passed) failed += " full-loss";
  int entries = 0;
  for (const auto& p : full.params) entries += p.entries_checked;

  const double secs = since(t0);
  Outcome o;
  o.pass = failed.empty() && secs < kOneMinute;
  o.detail = std::to_string(cases.size()) + " primitives + full loss (" + std::to_string(entries) +
             " entries), max rel err " + fmt(worst) + " (tol " + fmt(kGradTol) + "), " + fmt(secs, 3) + " s" +
             (failed.empty() ? "" : ", failed:" + failed);
  return o;
}

ArchGraph random_dag(Rng& rng, int max_nodes, int num_ops) {
  const int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_nodes - 1)));
  std::vector<int> types{0};
  for (int i = 1; i < n - 1; ++i) types.push_back(1 + static_cast<int>(rng.below(num_ops)));
  types.push_back(num_ops + 1);
  ArchGraph g(types);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(0.4)) g.set_edge(i, j);
  return g;
}

// 2. Isomorphic inputs give bitwise-equal posterior means.
Outcome iso_invariance() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  const int ops = desk().spec.num_ops();
  std::vector<std::pair<ArchGraph, ArchGraph>> pairs;
  int oracle_ok = 0;
  while (static_cast<int>(pairs.size()) < kIsoPairs) {
    ArchGraph g = random_dag(rng, 7, ops);
    std::vector<int> perm(static_cast<std::size_t>(g.node_count()));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    ArchGraph h = permute(g, perm);
    oracle_ok += oracle::isomorphic(g, h);
    pairs.emplace_back(std::move(g), std::move(h));
  }
  const Model untrained(desk().spec, desk_model_config(), 99);
  const double before = iso_mapping_test(untrained, pairs);
  const double gen_secs = since(t0);
  const Model& trained = trained_model();
  const auto t1 = Clock::now();
  const double after = iso_mapping_test(trained, pairs);
  const double secs = gen_secs + since(t1);
  Outcome o;
  o.pass = oracle_ok == kIsoPairs && before == 100.0 && after == 100.0 && secs < kOneMinute;
  o.detail = std::to_string(kIsoPairs) + " pairs up to 7 nodes (" + std::to_string(oracle_ok) +
             " oracle-verified), bitwise-equal means: untrained " + fmt(before) + "%, trained " + fmt(after) +
             "%, " + fmt(secs, 3) + " s excluding training";
  return o;
}

// 3. Closed-form KL against Monte Carlo on random diagonal posteriors.
Outcome kl_monte_carlo() {
  const auto t0 = Clock::now();
  Rng rng(303);
  double worst = 0.0;
  int outside = 0;
  for (int k = 0; k < kKlPosteriors; ++k) {
    GraphEmbedding emb;
    const int dim = 1 + static_cast<int>(rng.below(16));
    emb.mean.resize(dim);
    emb.log_var.resize(dim);
    for (int d = 0; d < dim; ++d) {
      emb.mean[d] = 2 * rng.normal();
      emb.log_var[d] = 4 * rng.uniform() - 3;
    }
    const Vector sd = (0.5 * emb.log_var.array()).exp();
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < kKlSamples; ++i) {
      // log q(z) - log p(z) with z = mu + sd * e
      double r = 0.0;
      for (Eigen::Index d = 0; d < emb.mean.size(); ++d) {
        const double e = rng.normal(), z = emb.mean[d] + sd[d] * e;
        r += -0.5 * e * e - 0.5 * emb.log_var[d] + 0.5 * z * z;
      }
      s += r;
      s2 += r * r;
    }
    const double mean = s / kKlSamples;
    const double se = std::sqrt(std::max(s2 / kKlSamples - mean * mean, 0.0) / kKlSamples);
    const double dev = std::abs(kl_divergence(emb) - mean) / se;
    worst = std::max(worst, dev);
    outside += dev > kSeBound;
  }
  const double secs = since(t0);
  Outcome o;
  o.pass = outside == 0 && secs < kOneMinute;
  o.detail = std::to_string(kKlPosteriors) + " posteriors x " + std::to_string(kKlSamples) +
             " samples, worst |closed - MC| = " + fmt(worst, 3) + " SE, " + std::to_string(outside) + " beyond " +
             fmt(kSeBound) + " SE, " + fmt(secs, 3) + " s";
  return o;
}

// 4. Reconstruction on held-out graphs after training on the mini space.
Outcome reconstruction() {
  const auto t0 = Clock::now();
  const Model& m = trained_model();
  const auto val = graphs_of(desk().data.val);
  const double stochastic = reconstruction_accuracy(m, val, 10, 1, 5);
  const double greedy = greedy_reconstruction_accuracy(m, val);
  const double secs = desk().train_seconds + since(t0);
  bool decreasing = desk().curve.size() >= 10;
  for (std::size_t e = 1; e < 10 && decreasing; ++e) decreasing = desk().curve[e].total < desk().curve[e - 1].total;
  Outcome o;
  o.pass = stochastic >= kMinStochastic && greedy >= kMinGreedy && decreasing && secs < kHalfHour;
  o.detail = std::to_string(desk().data.train.size()) + " train / " + std::to_string(val.size()) +
             " held out: stochastic " + fmt(stochastic) + "% (>= " + fmt(kMinStochastic) + "), greedy " +
             fmt(greedy) + "% (>= " + fmt(kMinGreedy) + "), first 10 epochs " +
             (decreasing ? "strictly decreasing" : "NOT strictly decreasing") + ", " + fmt(secs, 4) + " s";
  return o;
}

// 5. Prior validity and an independent recount from the decode log.
Outcome prior_validity(const fs::path& work) {
  const Model& m = trained_model();
  const auto train_g = graphs_of(desk().data.train);
  std::vector<DecodeLogEntry> log;
  const PriorMetrics pm = prior_metrics(m, train_g, 1000, 10, 9, &log);
  const std::string path = (work / "prior_decode_log.jsonl").string();
  write_decode_log(path, log, desk().spec);
  const PriorMetrics re = metrics_from_log(read_decode_log(path, desk().spec), desk().spec, hash_set(train_g));
  const bool same = re.total == pm.total && re.valid == pm.valid && re.validity == pm.validity &&
                    re.uniqueness == pm.uniqueness && re.novelty == pm.novelty;
  Outcome o;
  o.pass = pm.total == 10'000 && pm.validity >= kMinValidity && same;
  o.detail = std::to_string(pm.total) + " decodes: validity " + fmt(pm.validity) + "% (>= " + fmt(kMinValidity) +
             "), uniqueness " + (pm.uniqueness ? fmt(*pm.uniqueness) + "%" : "n/a") + ", novelty " +
             (pm.novelty ? fmt(*pm.novelty) + "%" : "n/a") + ", log recount " + (same ? "matches" : "DIFFERS");
  return o;
}

// 6. Enumeration sizes.
Outcome enumeration() {
  const auto t0 = Clock::now();
  const std::size_t nb201 = enumerate_space(presets::nb201_like()).size();
  const auto mini4 = presets::mini4();
  const auto listed = oracle::encodings(enumerate_space(mini4));
  const auto brute = oracle::space_classes(mini4);
  const auto mini = oracle::encodings(enumerate_space(presets::mini()));
  const auto mini_brute = oracle::space_classes(presets::mini());
  const double secs = since(t0);
  Outcome o;
  o.pass = nb201 == kNb201Size && listed == brute && mini == mini_brute && secs < kFiveMinutes;
  o.detail = "nb201 " + std::to_string(nb201) + " (expect " + std::to_string(kNb201Size) + "), mini4 " +
             std::to_string(listed.size()) + " vs brute force " + std::to_string(brute.size()) + ", mini " +
             std::to_string(mini.size()) + " vs brute force " + std::to_string(mini_brute.size()) + ", " + fmt(secs, 3) + " s";
  return o;
}

// 7. Seed expansion against a brute-force oracle.
Outcome expansion() {
  const auto t0 = Clock::now();
  const auto spec = presets::nb101_like();
  const std::vector<ArchGraph> seeds4{
      ArchGraph::from_edges({0, 2, 1, 4}, {{0, 1}, {1, 2}, {2, 3}}),
      ArchGraph::from_edges({0, 2, 3, 4}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {0, 3}}),
  };
  bool ok = true;
  std::string sizes;
  for (const auto& s : seeds4) {
    const auto lib = oracle::encodings(expand_graph(s, 5, spec));
    const auto ref = oracle::expansion_classes(s, spec.num_ops(), spec.max_edges);
    ok = ok && lib == ref && !lib.empty();
    sizes += (sizes.empty() ? "" : "/") + std::to_string(lib.size());
  }
  // Stand-in 7-node cell; the reference cell itself is not available.
  const ArchGraph seven = ArchGraph::from_edges(
      {0, 2, 2, 2, 2, 3, 4}, {{0, 1}, {0, 2}, {0, 3}, {0, 5}, {1, 6}, {2, 6}, {3, 4}, {4, 6}, {5, 6}});
  const auto lib7 = oracle::encodings(expand_graph(seven, 8, spec));
  const auto ref7 = oracle::expansion_classes(seven, spec.num_ops(), spec.max_edges);
  ok = ok && lib7 == ref7;
  const double secs = since(t0);
  Outcome o;
  o.pass = ok && secs < kTenMinutes;
  o.detail = "4-node seeds " + sizes + " candidates, equal to oracle: " + (ok ? "yes" : "no") +
             "; 7-node stand-in seed " + std::to_string(lib7.size()) + " (oracle " + std::to_string(ref7.size()) +
             ") vs reference " + std::to_string(kReferenceExpansion) + " for a cell not available here: " +
             (lib7.size() == kReferenceExpansion ? "reproduced" : "not comparable, reported only") + ", " + fmt(secs, 3) + " s";
  return o;
}

// 8. Fine-tuned predictor on 10% of the mini space, depth target.
Outcome predictor_ranking() {
  const Model& base = trained_model();
  const auto t0 = Clock::now();
  const auto& fixture = desk().fixture;
  const auto all = graphs_of(fixture);
  double best = 0.0;
  for (const auto& r : fixture) best = std::max(best, r.metrics->val_acc);
  double rho_sum = 0.0, rho_min = 1.0;
  int hits = 0;
  for (int trial = 0; trial < kTopTrials; ++trial) {
    Model m = base;
    std::vector<std::size_t> idx(fixture.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(mix_seed(800, static_cast<std::uint64_t>(trial)));
    rng.shuffle(idx);
    const std::size_t labeled = fixture.size() / 10;
    std::vector<LabeledPoint> train_pts, held;
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < labeled ? train_pts : held).push_back({fixture[idx[i]].graph, fixture[idx[i]].metrics->val_acc});
    FineTuneConfig fc;
    fc.seed = static_cast<std::uint64_t>(trial);
    fine_tune(m, train_pts, {}, fc);
    std::vector<double> pred, truth;
    for (const auto& p : held) {
      pred.push_back(predict_graph(m, p.graph));
      truth.push_back(p.target);
    }
    const double rho = spearman(pred, truth);
    rho_sum += rho;
    rho_min = std::min(rho_min, rho);
    // Ties at the maximum all count as the argmax.
    const auto top = rank_candidates(m, all, 1);
    hits += eval_target(depth_target(), top.front().graph, desk().spec) == best;
  }
  const double rho_mean = rho_sum / kTopTrials;
  Outcome o;
  const double secs = since(t0);
  o.pass = rho_mean >= kMinSpearman && hits >= kMinTopHits && secs < kHalfHour;
  o.detail = std::to_string(kTopTrials) + " trials on " + std::to_string(fixture.size() / 10) +
             " labels: held-out Spearman mean " + fmt(rho_mean) + " (min " + fmt(rho_min) + ", >= " +
             fmt(kMinSpearman) + "), top-1 is the argmax in " + std::to_string(hits) + "/" +
             std::to_string(kTopTrials) + " (>= " + std::to_string(kMinTopHits) + "), " + fmt(secs, 3) + " s";
  return o;
}

// Exact GP posterior written out directly, no shared code with the library.
GpPrediction textbook_gp(const std::vector<double>& x, const std::vector<double>& y, double xs, const GpHyper& h) {
  const int n = static_cast<int>(x.size());
  auto k = [&](double a, double b) {
    return h.signal_var * std::exp(-(a - b) * (a - b) / (2 * h.length_scale * h.length_scale));
  };
  Matrix K(n, n);
  Vector ks(n), Y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) K(i, j) = k(x[i], x[j]) + (i == j ? h.noise_var : 0.0);
    ks[i] = k(x[i], xs);
    Y[i] = y[i];
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(K);
  return {ks.dot(qr.solve(Y)), h.signal_var - ks.dot(qr.solve(ks))};
}

// 9. EI against Monte Carlo; m = n inducing GP against an exact GP.
Outcome ei_and_gp() {
  const auto t0 = Clock::now();
  Rng rng(909);
  double worst_ei = 0.0;
  int outside = 0;
  for (int k = 0; k < kEiTriples; ++k) {
    const double mu = 4 * rng.uniform() - 2, sigma = 0.05 + 2 * rng.uniform(), best = 4 * rng.uniform() - 2;
    double s = 0.0;
    for (int i = 0; i < kEiSamples; ++i) {
      const double v = std::max(mu + sigma * rng.normal() - best, 0.0);
      s += v;
    }
    // Standard error from the exact second moment of the improvement; the
    // sample estimate collapses to 0 when no draw improves.
    const double u = (mu - best) / sigma;
    const double cdf = 0.5 * std::erfc(-u / std::sqrt(2.0)), pdf = std::exp(-0.5 * u * u) / std::sqrt(2 * M_PI);
    const double m2 = ((mu - best) * (mu - best) + sigma * sigma) * cdf + (mu - best) * sigma * pdf;
    const double mean = s / kEiSamples;
    const double ei = expected_improvement(mu, sigma, best);
    const double se = std::sqrt(std::max(m2 - ei * ei, 0.0) / kEiSamples);
    const double diff = std::abs(ei - mean);
    const double dev = se > 0 ? diff / se : (diff == 0 ? 0.0 : INFINITY);
    worst_ei = std::max(worst_ei, dev);
    outside += dev > kSeBound;
  }

  double worst_gp = 0.0;
  for (int p = 0; p < kGpProblems; ++p) {
    const int n = 5 + p % 11;
    std::vector<double> xs, ys;
    std::vector<Vector> pts;
    for (int i = 0; i < n; ++i) {
      xs.push_back(6 * rng.uniform() - 3);
      ys.push_back(std::sin(xs.back()) + 0.1 * rng.normal());
      pts.push_back(Vector::Constant(1, xs.back()));
    }
    const GpHyper h{0.5 + rng.uniform(), 0.5 + rng.uniform(), 0.05 + 0.2 * rng.uniform()};
    const GpSurrogate sparse = GpSurrogate::fit_fixed(pts, ys, pts, h);
    for (int q = 0; q < 10; ++q) {
      const double at = 8 * rng.uniform() - 4;
      const GpPrediction a = sparse.predict(Vector::Constant(1, at));
      const GpPrediction b = textbook_gp(xs, ys, at, h);
      worst_gp = std::max({worst_gp, std::abs(a.mean - b.mean), std::abs(a.var - std::max(b.var, 0.0))});
    }
  }
  const double secs = since(t0);
  Outcome o;
  o.pass = outside == 0 && worst_gp <= kGpTol && secs < kFiveMinutes;
  o.detail = "EI on " + std::to_string(kEiTriples) + " triples x " + std::to_string(kEiSamples) +
             " samples: worst " + fmt(worst_ei, 3) + " SE, " + std::to_string(outside) + " beyond " +
             fmt(kSeBound) + "; m=n GP on " + std::to_string(kGpProblems) + " 1-D problems: max |diff| " +
             fmt(worst_gp, 3) + " (tol " + fmt(kGpTol) + "), " + fmt(secs, 3) + " s";
  return o;
}

// 10. BO against random search on the mini space.
Outcome bo_vs_random() {
  const Model& m = trained_model();
  const auto t0 = Clock::now();
  const auto pool = graphs_of(desk().fixture);
  const Oracle oracle = tabular_oracle(desk().fixture);
  double bo_sum = 0.0, rs_sum = 0.0;
  bool monotone = true;
  for (int trial = 0; trial < kBoTrials; ++trial) {
    BoConfig c;
    c.initial = 5;
    c.batch = 5;
    c.iterations = 4;
    c.seed = 1000 + static_cast<std::uint64_t>(trial);
    const BoResult bo = bo_loop(m, oracle, {}, pool, c);
    const BoResult rs = random_search(oracle, pool, c);
    for (std::size_t i = 1; i < bo.history.size(); ++i)
      monotone = monotone && bo.history[i].best_val >= bo.history[i - 1].best_val;
    bo_sum += bo.best_val;
    rs_sum += rs.best_val;
  }
  const double secs = since(t0);
  Outcome o;
  o.pass = bo_sum > rs_sum && monotone && secs < kTwentyMinutes;
  o.detail = std::to_string(kBoTrials) + " trials, 5 batches of 5: mean best BO " + fmt(bo_sum / kBoTrials) +
             " vs random " + fmt(rs_sum / kBoTrials) + ", BO best " + (monotone ? "monotone" : "NOT monotone") + ", " + fmt(secs, 3) + " s";
  return o;
}

std::string slurp(const fs::path& p, bool drop_last_column) {
  std::ifstream in(p, std::ios::binary);
  std::string out, line;
  if (!drop_last_column) {
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

// 11. Every CLI subcommand run twice gives byte-identical outputs.
Outcome cli_determinism(const std::string& cli, const fs::path& work) {
  if (cli.empty() || !fs::exists(cli)) return {false, "CLI binary not found: '" + cli + "'"};
  const char* steps[] = {"build-fixture", "ingest",  "train",          "eval-abilities", "finetune-predict",
                         "bo",            "extrapolate", "project-latent", "circle-walk"};
  for (const char* run : {"run_a", "run_b"}) {
    const fs::path dir = work / run;
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(work / (std::string(run) + ".json"))
        << R"({"seed": 11, "space": "mini", "data": {"fixture": "depth"},
 "model": {"d_node": 8, "d_z": 4, "d_hidden": 12, "predictor_widths": [8, 8, 4]},
 "train": {"epochs": 3}, "checkpoint": ")"
        << run << R"(/checkpoint.json",
 "metrics": {"n_z": 2, "n_prior": 20, "n_prior_decode": 2},
 "finetune": {"epochs": 5}, "bo": {"iterations": 2, "batch": 5, "hyper_iters": 5}})";
    for (const char* s : steps) {
      const std::string cmd = "\"" + cli + "\" " + s + " --config \"" + (work / (std::string(run) + ".json")).string() +
                              "\" --out \"" + dir.string() + "\" > \"" + (dir / "cli.log").string() + "\" 2>&1";
      if (std::system(cmd.c_str()) != 0) return {false, std::string("subcommand '") + s + "' failed, see " + dir.string()};
    }
  }
  int files = 0;
  std::string differ;
  for (const auto& e : fs::directory_iterator(work / "run_a")) {
    const std::string name = e.path().filename().string();
    if (name == "cli.log") continue;
    const bool wallclock = name.ends_with("_history.csv");
    ++files;
    if (!fs::exists(work / "run_b" / name) || slurp(e.path(), wallclock) != slurp(work / "run_b" / name, wallclock))
      differ += " " + name;
  }
  Outcome o;
  o.pass = differ.empty() && files > 0;
  o.detail = "9 subcommands x 2 runs, " + std::to_string(files) +
             " output files compared (history CSVs without the wallclock_s column)" +
             (differ.empty() ? ", all identical" : ", differing:" + differ);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "dagvae_acceptance";
  // Optional third argument: comma-separated criterion numbers to run.
  std::set<std::size_t> only;
  if (argc > 3) {
    std::stringstream ss(argv[3]);
    for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoul(tok));
  }
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient-integrity", gradient_integrity},
      {"iso-invariance", iso_invariance},
      {"kl-vs-monte-carlo", kl_monte_carlo},
      {"reconstruction", reconstruction},
      {"prior-validity", [&] { return prior_validity(work); }},
      {"enumeration", enumeration},
      {"seed-expansion", expansion},
      {"predictor-ranking", predictor_ranking},
      {"ei-and-gp", ei_and_gp},
      {"bo-vs-random", bo_vs_random},
      {"cli-determinism", [&] { return cli_determinism(cli, work); }},
  };
  int failures = 0;
  int run = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    ++run;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << i + 1 << " " << criteria[i].first << ": " << o.detail << std::endl;
  }
  std::cout << (run - failures) << "/" << run << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
