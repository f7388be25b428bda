#pragma once

#include <cstdint>
#include <vector>

#include "dagvae/autodiff.hpp"
#include "dagvae/graph.hpp"
#include "dagvae/model.hpp"

namespace dagvae {

/// Two seeded orthonormal directions in R^dim (Gram-Schmidt on normal draws).
std::pair<Vector, Vector> orthonormal_pair(int dim, std::uint64_t seed);

struct WalkPoint {
  Vector z;
  ArchGraph graph;  // greedy decode, canonical
};

/// r * (cos(2 pi i / n) u + sin(2 pi i / n) v) for i = 0..n-1, each decoded greedily.
std::vector<WalkPoint> circle_walk(const Model& m, int n, double radius, std::uint64_t seed);
std::vector<Vector> circle_points(int dim, int n, double radius, std::uint64_t seed);

}  // namespace dagvae
