#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dagvae/autodiff.hpp"
#include "dagvae/params.hpp"

namespace dagvae {

struct GradCheckOptions {
  double step = 1e-5;
  /// Denominator floor so that near-zero gradients compare absolutely.
  double abs_floor = 1e-6;
  double tolerance = 1e-4;
  /// 0 checks every entry; otherwise a seeded sample of this many per parameter.
  int max_entries_per_param = 0;
  std::uint64_t seed = 0;
};

struct ParamCheck {
  std::string name;
  int entries_checked = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  double max_rel_error = 0.0;
  bool passed = true;
};

/// Builds a scalar loss on the given tape; must be deterministic.
using LossFn = std::function<Var(Tape&)>;

/// Reverse-mode gradient of `f` against central differences, per parameter.
/// Parameter values are restored before returning.
GradCheckReport grad_check(const LossFn& f, ParamRegistry& registry,
                           const GradCheckOptions& options = {});

/// Relative error |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor);

}  // namespace dagvae
