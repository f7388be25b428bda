#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>

#include "doctest.h"

#include "dagvae/bo.hpp"
#include "dagvae/canonical.hpp"
#include "dagvae/enumerate.hpp"
#include "dagvae/error.hpp"
#include "dagvae/gp.hpp"
#include "dagvae/model.hpp"
#include "dagvae/rng.hpp"

using namespace dagvae;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::ConfigError;
}

double se_kernel(const Vector& a, const Vector& b, const GpHyper& h) {
  return h.signal_var * std::exp(-(a - b).squaredNorm() / (2.0 * h.length_scale * h.length_scale));
}

// Exact GP posterior from the textbook formulas, solved by QR.
GpPrediction exact_posterior(const std::vector<Vector>& x, const std::vector<double>& y, const GpHyper& h,
                             const Vector& z) {
  const int n = static_cast<int>(x.size());
  Matrix k(n, n);
  Vector ks(n), yv(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) k(i, j) = se_kernel(x[i], x[j], h) + (i == j ? h.noise_var : 0.0);
    ks(i) = se_kernel(x[i], z, h);
    yv(i) = y[i];
  }
  auto qr = k.colPivHouseholderQr();
  return {ks.dot(qr.solve(yv)), se_kernel(z, z, h) - ks.dot(qr.solve(ks))};
}

std::vector<Vector> random_points(int n, int d, Rng& rng) {
  std::vector<Vector> out;
  for (int i = 0; i < n; ++i) {
    Vector v(d);
    for (int j = 0; j < d; ++j) v(j) = 4.0 * rng.uniform() - 2.0;
    out.push_back(v);
  }
  return out;
}

ModelConfig small() {
  ModelConfig c;
  c.d_node = 6;
  c.d_z = 3;
  c.d_hidden = 8;
  c.predictor_widths = {4, 4, 3};
  return c;
}

struct Bench {
  Model model{presets::mini(4, 2), small(), 5};
  std::vector<ArchGraph> pool = enumerate_space(presets::mini(4, 2));

  std::vector<BenchRecord> records(const std::function<double(std::size_t)>& acc) const {
    std::vector<BenchRecord> out;
    for (std::size_t i = 0; i < pool.size(); ++i) out.push_back({pool[i], ArchMetrics{acc(i), acc(i) - 0.01, 100}});
    return out;
  }
};

bool monotone(const BoResult& r) {
  for (std::size_t i = 1; i < r.history.size(); ++i)
    if (r.history[i].best_val < r.history[i - 1].best_val || r.history[i].evaluations < r.history[i - 1].evaluations)
      return false;
  return true;
}

}  // namespace

TEST_SUITE("bo-search") {
  TEST_CASE("expected improvement examples") {
    CHECK(expected_improvement(0.0, 1.0, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
    CHECK(expected_improvement(1.0, 0.0, 0.0) == 1.0);
    CHECK(expected_improvement(-1.0, 0.0, 0.0) == 0.0);
    CHECK(expected_improvement(0.6, 0.0, 0.5) == doctest::Approx(0.1));
    CHECK(expected_improvement(0.5, 1e-9, 0.5) < 1e-9);
    CHECK(expected_improvement(-50.0, 1.0, 0.0) >= 0.0);
    CHECK(expected_improvement(0.5, 1.0, 0.0) > expected_improvement(0.0, 1.0, 0.0));
    CHECK(expected_improvement(0.0, 2.0, 0.0) > expected_improvement(0.0, 1.0, 0.0));
  }

  TEST_CASE("expected improvement agrees with monte carlo") {
    Rng rng(3);
    const double cases[][3] = {{0.2, 0.5, 0.4}, {1.0, 2.0, -0.5}, {-1.0, 0.3, 0.0}, {0.0, 1.0, 1.5}};
    for (const auto& c : cases) {
      const int n = 200000;
      double s = 0.0, s2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double v = std::max(c[0] + c[1] * rng.normal() - c[2], 0.0);
        s += v;
        s2 += v * v;
      }
      const double mc = s / n, se = std::sqrt((s2 / n - mc * mc) / n);
      CHECK(std::abs(expected_improvement(c[0], c[1], c[2]) - mc) < 4.0 * se + 1e-12);
    }
  }

  TEST_CASE("exact gp interpolates three points") {
    Rng rng(4);
    auto x = random_points(3, 2, rng);
    const std::vector<double> y{0.3, -1.2, 2.0};
    GpHyper h{1.0, 1.0, 1e-10};
    GpSurrogate gp = GpSurrogate::fit_fixed(x, y, {}, h);
    CHECK(gp.exact());
    for (int i = 0; i < 3; ++i) {
      GpPrediction p = gp.predict(x[i]);
      CHECK(p.mean == doctest::Approx(y[i]).epsilon(1e-6));
      CHECK(p.var < 1e-6);
    }
  }

  TEST_CASE("exact gp matches the closed form") {
    Rng rng(5);
    auto x = random_points(12, 3, rng);
    std::vector<double> y;
    for (const auto& v : x) y.push_back(std::sin(v(0)) + v(1) * v(2));
    GpHyper h{1.3, 0.8, 0.05};
    GpSurrogate gp = GpSurrogate::fit_fixed(x, y, {}, h);
    for (const auto& z : random_points(10, 3, rng)) {
      GpPrediction want = exact_posterior(x, y, h, z);
      GpPrediction got = gp.predict(z);
      CHECK(got.mean == doctest::Approx(want.mean).epsilon(1e-9));
      CHECK(got.var == doctest::Approx(want.var).epsilon(1e-8));
    }
  }

  TEST_CASE("inducing points at the data recover the exact gp") {
    Rng rng(6);
    auto x = random_points(10, 2, rng);
    std::vector<double> y;
    for (const auto& v : x) y.push_back(v.squaredNorm() - 1.0);
    GpHyper h{0.9, 1.1, 0.1};
    GpSurrogate sparse = GpSurrogate::fit_fixed(x, y, x, h);
    CHECK_FALSE(sparse.exact());
    CHECK(sparse.inducing_count() == 10);
    for (const auto& z : random_points(8, 2, rng)) {
      GpPrediction want = exact_posterior(x, y, h, z);
      GpPrediction got = sparse.predict(z);
      CHECK(got.mean == doctest::Approx(want.mean).epsilon(1e-6));
      CHECK(got.var == doctest::Approx(want.var).epsilon(1e-6));
    }
  }

  TEST_CASE("duplicate inputs average their targets") {
    const std::vector<Vector> x{Vector::Constant(2, 0.5), Vector::Constant(2, 0.5), Vector::Constant(2, -3.0)};
    GpSurrogate gp = GpSurrogate::fit_fixed(x, {1.0, 3.0, 0.0}, {}, GpHyper{1.0, 1.0, 0.0});
    CHECK(gp.jitter() > 0.0);
    CHECK(gp.predict(x[0]).mean == doctest::Approx(2.0).epsilon(1e-4));
  }

  TEST_CASE("posterior variance at data stays under the noise") {
    Rng rng(7);
    auto x = random_points(15, 2, rng);
    std::vector<double> y;
    for (const auto& v : x) y.push_back(v(0));
    GpHyper h{2.0, 0.7, 0.03};
    GpSurrogate gp = GpSurrogate::fit_fixed(x, y, {}, h);
    for (const auto& v : x) {
      const double var = gp.predict(v).var;
      CHECK(var >= 0.0);
      CHECK(var <= h.noise_var + gp.jitter() + 1e-12);
    }
    CHECK(gp.predict(Vector::Constant(2, 100.0)).var == doctest::Approx(h.signal_var).epsilon(1e-9));
  }

  TEST_CASE("fit picks exact or sparse by inducing count") {
    Rng rng(8);
    auto x = random_points(30, 2, rng);
    std::vector<double> y;
    for (const auto& v : x) y.push_back(10.0 + 3.0 * std::cos(v(0)));
    GpConfig c;
    c.hyper_iters = 10;
    c.m_inducing = 50;
    GpSurrogate exact = GpSurrogate::fit(x, y, c);
    CHECK(exact.exact());
    c.m_inducing = 8;
    GpSurrogate sparse = GpSurrogate::fit(x, y, c);
    CHECK_FALSE(sparse.exact());
    CHECK(sparse.inducing_count() == 8);
    // standardized internally, so predictions come back on the original scale
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) err += std::abs(exact.predict(x[i]).mean - y[i]);
    CHECK(err / x.size() < 1.0);
    CHECK(kind_of([&] { GpSurrogate::fit({x[0]}, {y[0]}, c); }) == ErrorKind::ShapeMismatch);
  }

  TEST_CASE("a batch larger than the pool evaluates everything") {
    Bench b;
    const Oracle oracle = tabular_oracle(b.records([](std::size_t i) { return 0.5 + 0.01 * static_cast<double>(i % 37); }));
    BoConfig c;
    c.iterations = 2;
    c.batch = 1000;
    c.initial = 5;
    c.gp.hyper_iters = 5;
    BoResult r = bo_loop(b.model, oracle, {}, b.pool, c);
    REQUIRE(r.history.size() == 3);
    CHECK(r.history[0].evaluations == 5);
    CHECK(r.history[1].evaluations == static_cast<int>(b.pool.size()));
    CHECK(r.history[2].evaluations == static_cast<int>(b.pool.size()));
    CHECK(r.best_val == doctest::Approx(0.5 + 0.36));
    CHECK(r.oracle_misses.empty());
  }

  TEST_CASE("constant oracle") {
    Bench b;
    const Oracle oracle = tabular_oracle(b.records([](std::size_t) { return 0.9; }));
    BoConfig c;
    c.iterations = 3;
    c.batch = 4;
    c.gp.hyper_iters = 5;
    BoResult r = bo_loop(b.model, oracle, {}, b.pool, c);
    CHECK(r.best_val == 0.9);
    CHECK(r.evaluated.size() == 16);
    for (const auto& row : r.history) CHECK(row.best_val == 0.9);
    CHECK(monotone(r));
  }

  TEST_CASE("history is monotone and the search is reproducible") {
    Bench b;
    const Oracle oracle = tabular_oracle(b.records([](std::size_t i) { return std::sin(static_cast<double>(i)); }));
    BoConfig c;
    c.iterations = 4;
    c.batch = 3;
    c.seed = 9;
    c.gp.hyper_iters = 5;
    BoResult r1 = bo_loop(b.model, oracle, {}, b.pool, c);
    BoResult r2 = bo_loop(b.model, oracle, {}, b.pool, c);
    CHECK(monotone(r1));
    REQUIRE(r1.evaluated.size() == r2.evaluated.size());
    for (std::size_t i = 0; i < r1.evaluated.size(); ++i)
      CHECK(labeling_key(r1.evaluated[i].graph) == labeling_key(r2.evaluated[i].graph));
    BoResult rs = random_search(oracle, b.pool, c);
    CHECK(monotone(rs));
    CHECK(rs.history.back().evaluations == 15);
  }

  TEST_CASE("seed set is evaluated first") {
    Bench b;
    const Oracle oracle = tabular_oracle(b.records([](std::size_t i) { return 0.01 * static_cast<double>(i); }));
    BoConfig c;
    c.iterations = 1;
    c.batch = 2;
    c.gp.hyper_iters = 5;
    const std::vector<ArchGraph> seeds{b.pool[0], b.pool[1], b.pool[2]};
    BoResult r = bo_loop(b.model, oracle, seeds, b.pool, c);
    CHECK(r.history[0].evaluations == 3);
    CHECK(r.history[1].evaluations == 5);
    for (int i = 0; i < 3; ++i) CHECK(labeling_key(r.evaluated[i].graph) == canonical_key(b.pool[i]));
  }

  TEST_CASE("oracle misses are logged and skipped") {
    Bench b;
    auto recs = b.records([](std::size_t i) { return 0.1 * static_cast<double>(i % 7); });
    std::vector<BenchRecord> half;
    for (std::size_t i = 0; i < recs.size(); i += 2) half.push_back(recs[i]);
    BoConfig c;
    c.iterations = 2;
    c.batch = 1000;
    c.initial = 6;
    c.gp.hyper_iters = 5;
    BoResult r = bo_loop(b.model, tabular_oracle(half), {}, b.pool, c);
    CHECK(r.evaluated.size() == half.size());
    CHECK(r.oracle_misses.size() == recs.size() - half.size());
    CHECK(r.oracle_misses[0].size() > 0);
  }

  TEST_CASE("bo config and history file") {
    Bench b;
    BoConfig c;
    c.batch = 0;
    CHECK(kind_of([&] { bo_loop(b.model, tabular_oracle({}), {}, b.pool, c); }) == ErrorKind::ConfigError);
    const fs::path path = fs::temp_directory_path() / "dagvae_bo_history_test.csv";
    write_bo_history(path.string(), {{0, 5, 0.9, 0.8, 0.1}, {1, 10, 0.95, 0.85, 0.2}});
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "iteration,evaluations_so_far,best_val,best_test,wallclock_s");
    CHECK(row.rfind("0,5,0.9", 0) == 0);
    fs::remove(path);
  }
}
