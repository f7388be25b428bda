#include "dagvae/explore.hpp"

#include <cmath>
#include <numbers>

#include "dagvae/decoder.hpp"
#include "dagvae/encoder.hpp"
#include "dagvae/error.hpp"
#include "dagvae/rng.hpp"

namespace dagvae {

std::pair<Vector, Vector> orthonormal_pair(int dim, std::uint64_t seed) {
  if (dim < 2) throw Error(ErrorKind::ConfigError, "circle walk needs a latent dimension of at least 2");
  Rng rng(mix_seed(seed, 0x636972636c65));
  Vector u = standard_normal(dim, rng).normalized();
  Vector v = standard_normal(dim, rng);
  v -= v.dot(u) * u;
  return {u, v.normalized()};
}

std::vector<Vector> circle_points(int dim, int n, double radius, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::ConfigError, "circle walk needs n >= 1");
  auto [u, v] = orthonormal_pair(dim, seed);
  std::vector<Vector> out;
  for (int i = 0; i < n; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / n;
    out.push_back(radius * (std::cos(theta) * u + std::sin(theta) * v));
  }
  return out;
}

std::vector<WalkPoint> circle_walk(const Model& m, int n, double radius, std::uint64_t seed) {
  std::vector<WalkPoint> out;
  Rng unused(0);
  for (auto& z : circle_points(m.config().d_z, n, radius, seed)) {
    ArchGraph g = decode(m, z, DecodeMode::Greedy, unused);
    out.push_back({std::move(z), std::move(g)});
  }
  return out;
}

}  // namespace dagvae
