#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dagvae/enumerate.hpp"
#include "dagvae/graph.hpp"
#include "dagvae/record.hpp"

namespace dagvae {

enum class TargetKind { Depth, EdgeDensity };

/// Deterministic stand-in accuracy in [0, 1] that depends only on the
/// canonical form.
struct SyntheticTarget {
  std::string name;
  TargetKind kind = TargetKind::Depth;
};

SyntheticTarget depth_target();
SyntheticTarget edge_density_target();
/// "depth" or "edge_density"
std::optional<SyntheticTarget> target_by_name(const std::string& name);

bool is_conv_like(const std::string& op);
/// Fixed per-op bonus in [0, 1].
double op_bonus(const std::string& op);

/// depth:        0.5 + 0.4 * convs_on_longest_path / max_possible + 0.1 * bonus_sum / slots
/// edge_density: 0.4 + 0.5 * |E| / max_edges + 0.1 * conv_fraction
double eval_target(const SyntheticTarget& target, const ArchGraph& g, const SearchSpaceSpec& spec);

/// Every canonical graph of `spec` with val_acc = test_acc = target value.
std::vector<BenchRecord> build_fixture(const SearchSpaceSpec& spec, const SyntheticTarget& target,
                                       const EnumerationBudget& budget = {});

}  // namespace dagvae
