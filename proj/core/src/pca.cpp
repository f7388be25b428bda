#include "dagvae/pca.hpp"

#include <cmath>

#include "dagvae/error.hpp"

namespace dagvae {

namespace {
constexpr double kMinVariance = 1e-12;
constexpr int kMaxIterations = 200000;
}  // namespace

PcaResult pca_project(const std::vector<Vector>& points, int k) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (k < 1) throw Error(ErrorKind::ShapeMismatch, "pca: k must be positive");
  if (n < k + 1) throw Error(ErrorKind::ShapeMismatch, "pca: need at least k+1 points");
  const Eigen::Index d = points[0].size();
  if (k > d) throw Error(ErrorKind::ShapeMismatch, "pca: k exceeds the dimension");

  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (points[i].size() != d) throw Error(ErrorKind::ShapeMismatch, "pca: point dimensions differ");
    x.row(i) = points[i].transpose();
  }
  PcaResult r;
  r.mean = x.colwise().mean().transpose();
  x.rowwise() -= r.mean.transpose();
  Matrix cov = (x.transpose() * x) / static_cast<double>(n - 1);

  r.components.resize(d, k);
  r.variances.resize(k);
  for (int c = 0; c < k; ++c) {
    // deterministic start with no special alignment to coordinate axes
    Vector v(d);
    for (Eigen::Index j = 0; j < d; ++j) v(j) = 1.0 + 0.1 * std::sin(1.0 + 3.0 * j + c);
    if (cov.norm() == 0.0) throw Error(ErrorKind::DegenerateSpread, "pca: zero covariance");
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < kMaxIterations; ++it) {
      Vector w = cov * v;
      const double norm = w.norm();
      if (norm < kMinVariance) break;
      w /= norm;
      if (w.dot(v) < 0) w = -w;
      const double delta = (w - v).norm();
      v = w;
      lambda = v.dot(cov * v);
      if (delta < 1e-13) break;
    }
    lambda = v.dot(cov * v);
    if (!(lambda >= kMinVariance))
      throw Error(ErrorKind::DegenerateSpread,
                  "pca: variance " + std::to_string(lambda) + " along component " + std::to_string(c + 1));
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    r.components.col(c) = v;
    r.variances(c) = lambda;
    cov -= lambda * v * v.transpose();
  }
  r.projections = x * r.components;
  return r;
}

}  // namespace dagvae
