#include "dagvae/params.hpp"

#include <cmath>

#include "dagvae/error.hpp"
#include "dagvae/rng.hpp"

namespace dagvae {

int ParamRegistry::add(const std::string& name, Matrix init) {
  if (by_name_.count(name) != 0) throw Error(ErrorKind::ConfigError, "duplicate parameter '" + name + "'");
  Parameter p;
  p.name = name;
  p.grad = Matrix::Zero(init.rows(), init.cols());
  p.adam_m = Matrix::Zero(init.rows(), init.cols());
  p.adam_v = Matrix::Zero(init.rows(), init.cols());
  p.value = std::move(init);
  params_.push_back(std::move(p));
  const int id = static_cast<int>(params_.size()) - 1;
  by_name_.emplace(name, id);
  return id;
}

std::optional<int> ParamRegistry::find(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

int ParamRegistry::index(const std::string& name) const {
  auto id = find(name);
  if (!id) throw Error(ErrorKind::ConfigError, "unknown parameter '" + name + "'");
  return *id;
}

std::size_t ParamRegistry::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParamRegistry::zero_grad() {
  for (auto& p : params_) {
    p.grad.setZero(p.value.rows(), p.value.cols());
    p.has_grad = true;
  }
}

void ParamRegistry::accumulate(const Tape& tape, double scale) {
  for (const auto& [i, g] : tape.param_grads()) accumulate(i, g, scale);
}

void ParamRegistry::accumulate(int index, const Matrix& grad, double scale) {
  Parameter& p = params_.at(index);
  if (grad.rows() != p.value.rows() || grad.cols() != p.value.cols())
    throw Error(ErrorKind::ShapeMismatch, "gradient shape differs for '" + p.name + "'");
  if (!p.has_grad) {
    p.grad.setZero(p.value.rows(), p.value.cols());
    p.has_grad = true;
  }
  p.grad += scale * grad;
}

void ParamRegistry::reset_optimizer_state() {
  for (auto& p : params_) {
    p.adam_m.setZero(p.value.rows(), p.value.cols());
    p.adam_v.setZero(p.value.rows(), p.value.cols());
  }
  adam_steps_ = 0;
}

std::vector<int> ParamRegistry::indices_with_prefix(std::span<const std::string> prefixes) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < params_.size(); ++i)
    for (const auto& pre : prefixes)
      if (params_[i].name.rfind(pre, 0) == 0) {
        out.push_back(static_cast<int>(i));
        break;
      }
  return out;
}

void adam_step(ParamRegistry& registry, const AdamConfig& config) {
  std::vector<int> all(registry.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  adam_step(registry, config, all);
}

void adam_step(ParamRegistry& registry, const AdamConfig& c, std::span<const int> subset) {
  for (int i : subset)
    if (!registry.at(i).has_grad)
      throw Error(ErrorKind::MissingGrad, "no gradient for '" + registry.at(i).name + "'");
  const std::int64_t t = registry.adam_steps() + 1;
  registry.set_adam_steps(t);
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
  for (int i : subset) {
    Parameter& p = registry.at(i);
    p.adam_m = c.beta1 * p.adam_m + (1.0 - c.beta1) * p.grad;
    p.adam_v = c.beta2 * p.adam_v + (1.0 - c.beta2) * p.grad.cwiseProduct(p.grad);
    const auto mhat = p.adam_m.array() / bc1;
    const auto vhat = p.adam_v.array() / bc2;
    p.value.array() -= c.lr * mhat / (vhat.sqrt() + c.eps);
    if (!p.value.allFinite()) throw Error(ErrorKind::NonFiniteValue, "adam update of '" + p.name + "'");
    p.grad.setZero();
    p.has_grad = false;
  }
}

Matrix init_uniform(Eigen::Index rows, Eigen::Index cols, double scale, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = scale * (2.0 * rng.uniform() - 1.0);
  return m;
}

}  // namespace dagvae
