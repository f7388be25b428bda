#include "dagvae/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dagvae/rng.hpp"

namespace dagvae {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const LossFn& f, ParamRegistry& registry, const GradCheckOptions& o) {
  std::vector<Matrix> analytic(registry.size());
  {
    Tape tape(&registry);
    Var loss = f(tape);
    tape.backward(loss);
    for (std::size_t i = 0; i < registry.size(); ++i)
      analytic[i] = Matrix::Zero(registry.at(i).value.rows(), registry.at(i).value.cols());
    for (auto& [i, g] : tape.param_grads()) analytic[i] = g;
  }
  auto eval = [&] {
    Tape tape(&registry);
    return f(tape).scalar();
  };

  GradCheckReport report;
  Rng rng(mix_seed(o.seed, 0x67636b));
  for (std::size_t i = 0; i < registry.size(); ++i) {
    Parameter& p = registry.at(static_cast<int>(i));
    const Eigen::Index n = p.value.size();
    std::vector<Eigen::Index> entries(n);
    std::iota(entries.begin(), entries.end(), Eigen::Index{0});
    if (o.max_entries_per_param > 0 && n > o.max_entries_per_param) {
      rng.shuffle(entries);
      entries.resize(o.max_entries_per_param);
      std::sort(entries.begin(), entries.end());
    }
    ParamCheck pc;
    pc.name = p.name;
    for (Eigen::Index e : entries) {
      double& x = p.value.data()[e];
      const double saved = x;
      x = saved + o.step;
      const double up = eval();
      x = saved - o.step;
      const double down = eval();
      x = saved;
      const double numeric = (up - down) / (2.0 * o.step);
      const double a = analytic[i].data()[e];
      pc.max_rel_error = std::max(pc.max_rel_error, relative_error(a, numeric, o.abs_floor));
      pc.max_abs_error = std::max(pc.max_abs_error, std::abs(a - numeric));
      ++pc.entries_checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, pc.max_rel_error);
    report.params.push_back(std::move(pc));
  }
  report.passed = report.max_rel_error < o.tolerance;
  return report;
}

}  // namespace dagvae
