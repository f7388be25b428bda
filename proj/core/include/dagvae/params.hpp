#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dagvae/autodiff.hpp"

namespace dagvae {

class Rng;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool has_grad = false;
  Matrix adam_m;
  Matrix adam_v;
};

/// Named learnable tensors plus Adam state. Names are unique.
class ParamRegistry {
 public:
  /// Throws ConfigError on a duplicate name.
  int add(const std::string& name, Matrix init);
  std::optional<int> find(const std::string& name) const;
  int index(const std::string& name) const;  // throws ConfigError

  Parameter& at(int i) { return params_.at(i); }
  const Parameter& at(int i) const { return params_.at(i); }
  Parameter& operator[](const std::string& name) { return params_[index(name)]; }
  const Parameter& operator[](const std::string& name) const { return params_[index(name)]; }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  /// Sets every gradient to zero and marks it populated.
  void zero_grad();
  /// Adds scale * (gradients recorded by `tape`) into the gradient slots.
  void accumulate(const Tape& tape, double scale = 1.0);
  void accumulate(int index, const Matrix& grad, double scale = 1.0);

  std::int64_t adam_steps() const { return adam_steps_; }
  void set_adam_steps(std::int64_t steps) { adam_steps_ = steps; }
  void reset_optimizer_state();

  /// Indices of parameters whose names start with any of `prefixes`.
  std::vector<int> indices_with_prefix(std::span<const std::string> prefixes) const;

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, int> by_name_;
  std::int64_t adam_steps_ = 0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam update of every parameter (or of `subset`), then the
/// gradients of the updated parameters are zeroed and marked unpopulated.
/// Throws MissingGrad if an updated parameter has no populated gradient.
void adam_step(ParamRegistry& registry, const AdamConfig& config);
void adam_step(ParamRegistry& registry, const AdamConfig& config, std::span<const int> subset);

/// Entries drawn uniformly from (-scale, scale), column-major draw order.
Matrix init_uniform(Eigen::Index rows, Eigen::Index cols, double scale, Rng& rng);

}  // namespace dagvae
