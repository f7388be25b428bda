#include "dagvae/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dagvae/canonical.hpp"
#include "dagvae/encoder.hpp"
#include "dagvae/error.hpp"
#include "dagvae/nn.hpp"
#include "dagvae/parallel.hpp"
#include "dagvae/rng.hpp"
#include "dagvae/trainer.hpp"

namespace dagvae {

Var predictor_forward(Tape& t, const Model& m, Var z) {
  const auto& layers = m.predictor().layers;
  Var x = z;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = linear(t, layers[i], x);
    if (i + 1 < layers.size()) x = relu(x);
  }
  return x;
}

double predict(const Model& m, const Vector& z) {
  Tape t(&m.params());
  return predictor_forward(t, m, t.constant(z)).scalar();
}

double predict_graph(const Model& m, const ArchGraph& g) { return predict(m, encode(m, g).mean); }

namespace {

Var point_loss(Tape& t, const Model& m, const LabeledPoint& p) {
  EncodedVars e = encode_on_tape(t, m, p.graph);
  Var diff = sub(predictor_forward(t, m, e.mean), t.constant_scalar(p.target));
  return hadamard(diff, diff);
}

}  // namespace

double mean_squared_error(const Model& m, const std::vector<LabeledPoint>& points, int threads) {
  if (points.empty()) return 0.0;
  std::vector<double> err(points.size());
  parallel_for(
      points.size(),
      [&](std::size_t i) {
        const double d = predict_graph(m, points[i].graph) - points[i].target;
        err[i] = d * d;
      },
      threads);
  double s = 0.0;
  for (double e : err) s += e;
  return s / static_cast<double>(points.size());
}

FineTuneReport fine_tune(Model& m, const std::vector<LabeledPoint>& train, const std::vector<LabeledPoint>& val,
                         const FineTuneConfig& c) {
  if (train.empty()) throw Error(ErrorKind::EmptyDataset, "fine_tune: no labeled points");
  if (c.epochs < 0 || c.batch_size < 1 || !(c.lr > 0)) throw Error(ErrorKind::ConfigError, "fine_tune: bad config");
  for (const auto& p : train)
    if (!std::isfinite(p.target)) throw Error(ErrorKind::NonFiniteValue, "fine_tune: non-finite target");
  ParamRegistry& reg = m.params();
  reg.reset_optimizer_state();
  const std::vector<int> subset = m.encoder_and_predictor_params();
  const AdamConfig adam{c.lr, 0.9, 0.999, 1e-8};
  std::vector<std::size_t> order(train.size());
  FineTuneReport report;
  for (int epoch = 0; epoch < c.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(c.seed, 0x66696e65 + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    for (std::size_t lo = 0; lo < order.size(); lo += static_cast<std::size_t>(c.batch_size)) {
      const std::size_t count = std::min(order.size() - lo, static_cast<std::size_t>(c.batch_size));
      reg.zero_grad();
      accumulate_batch(
          reg, count, [&](Tape& t, std::size_t i) { return point_loss(t, m, train[order[lo + i]]); },
          1.0 / static_cast<double>(count), c.threads);
      adam_step(reg, adam, subset);
    }
    report.train_mse.push_back(mean_squared_error(m, train, c.threads));
  }
  if (!val.empty()) report.val_mse = mean_squared_error(m, val, c.threads);
  return report;
}

std::vector<RankedCandidate> rank_candidates(const Model& m, const std::vector<ArchGraph>& candidates,
                                             std::size_t top_k, int threads) {
  std::vector<RankedCandidate> all(candidates.size());
  std::vector<GraphKey> keys(candidates.size());
  parallel_for(
      candidates.size(),
      [&](std::size_t i) {
        all[i].graph = canonicalize(candidates[i]);
        keys[i] = labeling_key(all[i].graph);
        all[i].prediction = predict_graph(m, all[i].graph);
        all[i].canonical_hash = key_hash(keys[i]);
      },
      threads);
  std::vector<std::size_t> idx(all.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (all[a].prediction != all[b].prediction) return all[a].prediction > all[b].prediction;
    return keys[a] < keys[b];
  });
  std::vector<RankedCandidate> out;
  for (std::size_t i = 0; i < idx.size() && out.size() < top_k; ++i) out.push_back(all[idx[i]]);
  return out;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = rank;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw Error(ErrorKind::ShapeMismatch, "spearman: need paired samples");
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0 || sbb == 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace dagvae
