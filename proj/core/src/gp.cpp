#include "dagvae/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>

#include "dagvae/error.hpp"
#include "dagvae/rng.hpp"

namespace dagvae {

double expected_improvement(double mu, double sigma, double y_best) {
  const double d = mu - y_best;
  if (!(sigma > 0)) return std::max(d, 0.0);
  const double u = d / sigma;
  const double cdf = 0.5 * std::erfc(-u / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, d * cdf + sigma * pdf);
}

double GpSurrogate::kernel(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) const {
  const double ls = hyper_.length_scale;
  return hyper_.signal_var * std::exp(-0.5 * (a - b).squaredNorm() / (ls * ls));
}

Matrix GpSurrogate::cross(const Matrix& a, const Matrix& b) const {
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = kernel(a.row(i).transpose(), b.row(j).transpose());
  return k;
}

namespace {

/// Cholesky of k + jitter * I with escalation from a tiny relative jitter.
Eigen::LLT<Matrix> robust_cholesky(const Matrix& k, double& jitter, double base) {
  const Eigen::Index n = k.rows();
  const double scale = std::max(k.diagonal().mean(), 1e-300);
  double j = base;
  for (int attempt = 0; attempt < 10; ++attempt) {
    Matrix a = k;
    a.diagonal().array() += j * scale;
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0) {
      jitter = j * scale;
      return llt;
    }
    j = j == 0 ? 1e-12 : j * 10.0;
  }
  throw Error(ErrorKind::IllConditioned, "cholesky failed after jitter escalation (n=" + std::to_string(n) + ")");
}

Matrix rows_of(const std::vector<Vector>& pts) {
  if (pts.empty()) return Matrix(0, 0);
  Matrix m(pts.size(), pts[0].size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].size() != m.cols()) throw Error(ErrorKind::ShapeMismatch, "gp: point dimensions differ");
    m.row(i) = pts[i].transpose();
  }
  return m;
}

}  // namespace

void GpSurrogate::factor() {
  const double n = static_cast<double>(x_.rows());
  const double s2 = hyper_.noise_var;
  if (exact_) {
    Matrix k = cross(x_, x_);
    k.diagonal().array() += s2;
    l_ = robust_cholesky(k, jitter_, 0.0);
    alpha_ = l_.solve(y_);
    const Matrix L = l_.matrixL();
    objective_ = -0.5 * y_.dot(alpha_) - L.diagonal().array().log().sum() - 0.5 * n * std::log(2 * std::numbers::pi);
    return;
  }
  const Matrix kmm = cross(z_, z_);
  l_ = robust_cholesky(kmm, jitter_, 0.0);
  const Matrix kmn = cross(z_, x_);
  const double sigma = std::sqrt(s2);
  const Matrix a = l_.matrixL().solve(kmn) / sigma;
  Matrix b = a * a.transpose();
  b.diagonal().array() += 1.0;
  lb_ = Eigen::LLT<Matrix>(b);
  if (lb_.info() != Eigen::Success) throw Error(ErrorKind::IllConditioned, "gp: B factorization failed");
  alpha_ = lb_.matrixL().solve(a * y_) / sigma;  // c
  const Matrix LB = lb_.matrixL();
  const double trace_knn = n * hyper_.signal_var;
  objective_ = -0.5 * n * std::log(2 * std::numbers::pi) - LB.diagonal().array().log().sum() - 0.5 * n * std::log(s2) -
               0.5 * y_.squaredNorm() / s2 + 0.5 * alpha_.squaredNorm() -
               0.5 * (trace_knn / s2 - a.squaredNorm());
}

GpPrediction GpSurrogate::predict(const Vector& z) const {
  Matrix zs(1, z.size());
  zs.row(0) = z.transpose();
  GpPrediction p;
  const double kss = hyper_.signal_var;
  if (exact_) {
    const Vector ks = cross(x_, zs).col(0);
    p.mean = ks.dot(alpha_);
    const Vector v = l_.matrixL().solve(ks);
    p.var = kss - v.squaredNorm();
  } else {
    const Vector kms = cross(z_, zs).col(0);
    const Vector t1 = l_.matrixL().solve(kms);
    const Vector t2 = lb_.matrixL().solve(t1);
    p.mean = t2.dot(alpha_);
    p.var = kss - t1.squaredNorm() + t2.squaredNorm();
  }
  p.var = std::max(p.var, 0.0);
  p.mean = p.mean * y_scale_ + y_mean_;
  p.var *= y_scale_ * y_scale_;
  return p;
}

GpSurrogate GpSurrogate::fit_fixed(const std::vector<Vector>& x, const std::vector<double>& y,
                                   const std::vector<Vector>& inducing, const GpHyper& hyper) {
  if (x.size() != y.size() || x.empty()) throw Error(ErrorKind::ShapeMismatch, "gp: need paired, non-empty data");
  GpSurrogate gp;
  gp.hyper_ = hyper;
  gp.x_ = rows_of(x);
  gp.y_ = Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
  gp.exact_ = inducing.empty();
  if (!gp.exact_) gp.z_ = rows_of(inducing);
  gp.factor();
  return gp;
}

namespace {

std::vector<Vector> select_inducing(const Matrix& x, int m, int lloyd, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0x696e64));
  rng.shuffle(idx);
  Matrix c(m, x.cols());
  for (int i = 0; i < m; ++i) c.row(i) = x.row(idx[i]);
  for (int it = 0; it < lloyd; ++it) {
    Matrix sum = Matrix::Zero(m, x.cols());
    std::vector<int> count(m, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (c.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
      sum.row(best) += x.row(i);
      ++count[best];
    }
    for (int k = 0; k < m; ++k)
      if (count[k] > 0) c.row(k) = sum.row(k) / count[k];
  }
  std::vector<Vector> out;
  for (int i = 0; i < m; ++i) out.push_back(c.row(i).transpose());
  return out;
}

}  // namespace

GpSurrogate GpSurrogate::fit(const std::vector<Vector>& x, const std::vector<double>& y, const GpConfig& cfg) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::ShapeMismatch, "gp: need at least two points");
  const Matrix xm = rows_of(x);
  const double n = static_cast<double>(y.size());
  double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  double scale = std::sqrt(var / n);
  if (!(scale > 1e-12)) scale = 1.0;
  std::vector<double> ys(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) ys[i] = (y[i] - mean) / scale;

  std::vector<Vector> inducing;
  if (cfg.m_inducing < static_cast<int>(x.size()))
    inducing = select_inducing(xm, std::max(1, cfg.m_inducing), cfg.lloyd_iters, cfg.seed);

  // median pairwise distance as the initial length scale
  std::vector<double> d;
  for (Eigen::Index i = 0; i < xm.rows(); ++i)
    for (Eigen::Index j = i + 1; j < xm.rows(); ++j) d.push_back((xm.row(i) - xm.row(j)).norm());
  std::sort(d.begin(), d.end());
  double ls0 = d.empty() ? 1.0 : d[d.size() / 2];
  if (!(ls0 > 1e-6)) ls0 = 1.0;

  Vector theta(3);
  theta << 0.0, std::log(ls0), std::log(0.1);
  const Vector lo = (Vector(3) << -5.0, std::log(1e-3), std::log(1e-6)).finished();
  const Vector hi = (Vector(3) << 5.0, std::log(1e3), std::log(10.0)).finished();
  auto hyper_of = [](const Vector& t) { return GpHyper{std::exp(t(0)), std::exp(t(1)), std::exp(t(2))}; };
  auto objective = [&](const Vector& t) {
    try {
      return fit_fixed(x, ys, inducing, hyper_of(t)).objective();
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  if (cfg.optimize) {
    Vector m1 = Vector::Zero(3), m2 = Vector::Zero(3);
    const double h = 1e-4;
    for (int it = 1; it <= cfg.hyper_iters; ++it) {
      Vector g(3);
      for (int k = 0; k < 3; ++k) {
        Vector up = theta, dn = theta;
        up(k) += h;
        dn(k) -= h;
        const double fu = objective(up), fd = objective(dn);
        g(k) = std::isfinite(fu) && std::isfinite(fd) ? (fu - fd) / (2 * h) : 0.0;
      }
      m1 = 0.9 * m1 + 0.1 * g;
      m2 = 0.999 * m2 + 0.001 * g.cwiseProduct(g);
      const Vector mh = m1 / (1 - std::pow(0.9, it));
      const Vector vh = m2 / (1 - std::pow(0.999, it));
      theta += (cfg.hyper_lr * mh.array() / (vh.array().sqrt() + 1e-8)).matrix();
      theta = theta.cwiseMax(lo).cwiseMin(hi);
    }
  }
  GpSurrogate gp = fit_fixed(x, ys, inducing, hyper_of(theta));
  gp.y_mean_ = mean;
  gp.y_scale_ = scale;
  return gp;
}

}  // namespace dagvae
