#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dagvae/autodiff.hpp"

namespace dagvae {

/// Squared-exponential kernel sf2 * exp(-|a - b|^2 / (2 ls^2)) plus noise.
struct GpHyper {
  double signal_var = 1.0;
  double length_scale = 1.0;
  double noise_var = 0.1;
};

struct GpConfig {
  int m_inducing = 500;
  bool optimize = true;
  int hyper_iters = 60;
  double hyper_lr = 0.05;
  int lloyd_iters = 5;
  std::uint64_t seed = 0;
};

struct GpPrediction {
  double mean = 0.0;
  double var = 0.0;  // latent variance, clamped at 0
};

/// Sparse GP regression with the collapsed (Titsias) bound and DTC
/// predictions, or an exact GP when no inducing set is used. Targets are
/// standardized internally by fit(); fit_fixed() uses them as given.
class GpSurrogate {
 public:
  /// Exact GP when m_inducing >= n, else k-means-style inducing points.
  /// Hyperparameters by gradient ascent on the (approximate) log marginal
  /// likelihood. Throws IllConditioned when jitter escalation fails.
  static GpSurrogate fit(const std::vector<Vector>& x, const std::vector<double>& y, const GpConfig& config);

  /// Fixed hyperparameters, no standardization. An empty `inducing` gives the exact GP.
  static GpSurrogate fit_fixed(const std::vector<Vector>& x, const std::vector<double>& y,
                               const std::vector<Vector>& inducing, const GpHyper& hyper);

  GpPrediction predict(const Vector& z) const;
  const GpHyper& hyper() const { return hyper_; }
  bool exact() const { return exact_; }
  int inducing_count() const { return static_cast<int>(z_.rows()); }
  double objective() const { return objective_; }
  double jitter() const { return jitter_; }

 private:
  void factor();
  double kernel(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) const;
  Matrix cross(const Matrix& a, const Matrix& b) const;

  GpHyper hyper_;
  bool exact_ = true;
  Matrix x_;  // n x d
  Vector y_;
  Matrix z_;  // m x d
  double y_mean_ = 0.0, y_scale_ = 1.0;
  double jitter_ = 0.0;
  double objective_ = 0.0;
  // exact: chol(K + noise I), alpha. sparse: chol(Kmm), chol(B), c.
  Eigen::LLT<Matrix> l_;
  Eigen::LLT<Matrix> lb_;
  Vector alpha_;
};

/// Maximization EI; max(mu - y_best, 0) when sigma == 0.
double expected_improvement(double mu, double sigma, double y_best);

}  // namespace dagvae
