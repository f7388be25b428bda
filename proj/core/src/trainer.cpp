#include "dagvae/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "dagvae/decoder.hpp"
#include "dagvae/error.hpp"
#include "dagvae/parallel.hpp"
#include "dagvae/rng.hpp"

namespace dagvae {

void TrainConfig::validate() const {
  if (epochs < 0 || batch_size < 1 || !(lr > 0) || !(alpha >= 0) || checkpoint_every < 0)
    throw Error(ErrorKind::ConfigError, "train: epochs >= 0, batch_size >= 1, lr > 0, alpha >= 0 required");
}

double kl_divergence(const GraphEmbedding& e) {
  if (!e.mean.allFinite() || !e.log_var.allFinite())
    throw Error(ErrorKind::NonFiniteValue, "kl_divergence: non-finite posterior");
  const auto lv = e.log_var.array();
  return 0.5 * (e.mean.array().square() + lv.exp() - lv - 1.0).sum();
}

Var kl_divergence(Tape& t, const EncodedVars& e) {
  Var terms = sub(add(hadamard(e.mean, e.mean), exp(e.log_var)), e.log_var);
  Var ones = t.constant(Matrix::Ones(e.mean.rows(), 1));
  return scale(sum(sub(terms, ones)), 0.5);
}

ReconstructionVars reconstruction_loss(Tape& t, const Model& m, const ArchGraph& g, Var z) {
  return {directional_loss(t, m, z, g, Direction::Forward), directional_loss(t, m, z, g, Direction::Backward)};
}

GraphLoss graph_loss(Tape& t, const Model& m, const ArchGraph& g, const Vector& eps, double alpha) {
  EncodedVars e = encode_on_tape(t, m, g);
  Var z = reparameterize(t, e, eps);
  ReconstructionVars rec = reconstruction_loss(t, m, g, z);
  Var kl = kl_divergence(t, e);
  Var rec_total = sum(concat_rows({rec.fwd.node, rec.fwd.edge, rec.bwd.node, rec.bwd.edge}));
  Var total = alpha == 0.0 ? rec_total : add(rec_total, scale(kl, alpha));
  GraphLoss out{total, {}};
  out.parts.node_fwd = rec.fwd.node.scalar();
  out.parts.edge_fwd = rec.fwd.edge.scalar();
  out.parts.node_bwd = rec.bwd.node.scalar();
  out.parts.edge_bwd = rec.bwd.edge.scalar();
  out.parts.kl = kl.scalar();
  out.parts.alpha = alpha;
  out.parts.total = total.scalar();
  return out;
}

Vector training_noise(std::uint64_t seed, int epoch, std::size_t index, int d_z) {
  Rng rng(mix_seed(mix_seed(seed, 0x6e6f697365 + static_cast<std::uint64_t>(epoch)), index));
  return standard_normal(d_z, rng);
}

std::vector<double> accumulate_batch(ParamRegistry& params, std::size_t count, const TapeLossFn& fn,
                                     double scale_by, int threads) {
  std::vector<std::vector<std::pair<int, Matrix>>> grads(count);
  std::vector<double> losses(count);
  parallel_for(
      count,
      [&](std::size_t i) {
        Tape t(&params);
        Var loss = fn(t, i);
        losses[i] = loss.scalar();
        t.backward(loss);
        grads[i] = t.param_grads();
      },
      threads);
  for (auto& list : grads)
    for (auto& [idx, g] : list) params.accumulate(idx, g, scale_by);
  return losses;
}

std::vector<LossBreakdown> train(Model& m, const std::vector<ArchGraph>& dataset, const TrainConfig& c,
                                 const EpochCallback& on_epoch) {
  c.validate();
  if (dataset.empty()) throw Error(ErrorKind::EmptyDataset, "train: no graphs");
  const AdamConfig adam{c.lr, 0.9, 0.999, 1e-8};
  const int dz = m.config().d_z;
  std::vector<LossBreakdown> curve;
  std::vector<std::size_t> order(dataset.size());

  for (int epoch = 0; epoch < c.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(mix_seed(c.seed, 0x7368756666 + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    LossBreakdown mean;
    mean.alpha = c.alpha;
    for (std::size_t lo = 0; lo < order.size(); lo += static_cast<std::size_t>(c.batch_size)) {
      const std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(c.batch_size));
      const std::size_t count = hi - lo;
      std::vector<LossBreakdown> parts(count);
      m.params().zero_grad();
      accumulate_batch(
          m.params(), count,
          [&](Tape& t, std::size_t i) {
            const std::size_t slot = lo + i;
            GraphLoss gl = graph_loss(t, m, dataset[order[slot]], training_noise(c.seed, epoch, slot, dz), c.alpha);
            parts[i] = gl.parts;
            return gl.total;
          },
          1.0 / static_cast<double>(count), c.threads);
      adam_step(m.params(), adam);
      for (const auto& p : parts) {
        mean.node_fwd += p.node_fwd;
        mean.edge_fwd += p.edge_fwd;
        mean.node_bwd += p.node_bwd;
        mean.edge_bwd += p.edge_bwd;
        mean.kl += p.kl;
        mean.total += p.total;
      }
    }
    const double n = static_cast<double>(dataset.size());
    mean.node_fwd /= n;
    mean.edge_fwd /= n;
    mean.node_bwd /= n;
    mean.edge_bwd /= n;
    mean.kl /= n;
    mean.total /= n;
    curve.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
    if (c.checkpoint_every > 0 && !c.checkpoint_path.empty() && (epoch + 1) % c.checkpoint_every == 0)
      save_checkpoint(m, c.checkpoint_path);
  }
  return curve;
}

void write_loss_csv(const std::string& path, const std::vector<LossBreakdown>& curve) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write '" + path + "'");
  out << "epoch,node_fwd,edge_fwd,node_bwd,edge_bwd,kl,total\n";
  out << std::setprecision(17);
  for (std::size_t e = 0; e < curve.size(); ++e) {
    const auto& l = curve[e];
    out << e + 1 << ',' << l.node_fwd << ',' << l.edge_fwd << ',' << l.node_bwd << ',' << l.edge_bwd << ','
        << l.kl << ',' << l.total << '\n';
  }
}

}  // namespace dagvae
