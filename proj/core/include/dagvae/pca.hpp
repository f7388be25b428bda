#pragma once

#include <vector>

#include "dagvae/autodiff.hpp"

namespace dagvae {

struct PcaResult {
  Matrix projections;  // n x k
  Matrix components;   // d x k, unit columns
  Vector variances;    // k, sample variance along each component
  Vector mean;         // d
};

/// Mean-centered projection onto the top-k principal directions, found by
/// power iteration with deflation on the sample covariance. Each component
/// is signed so that its largest-magnitude loading is positive.
/// Throws ShapeMismatch for fewer than k+1 points or k > dimension, and
/// DegenerateSpread when a requested component has variance below 1e-12.
PcaResult pca_project(const std::vector<Vector>& points, int k);

}  // namespace dagvae
