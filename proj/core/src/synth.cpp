#include "dagvae/synth.hpp"

#include <algorithm>
#include <limits>

#include "dagvae/canonical.hpp"

namespace dagvae {

SyntheticTarget depth_target() { return {"depth", TargetKind::Depth}; }
SyntheticTarget edge_density_target() { return {"edge_density", TargetKind::EdgeDensity}; }

std::optional<SyntheticTarget> target_by_name(const std::string& name) {
  if (name == "depth") return depth_target();
  if (name == "edge_density") return edge_density_target();
  return std::nullopt;
}

bool is_conv_like(const std::string& op) { return op.find("conv") != std::string::npos; }

double op_bonus(const std::string& op) {
  if (is_conv_like(op)) return op.find("3x3") != std::string::npos ? 1.0 : 0.6;
  if (op.find("pool") != std::string::npos) return 0.3;
  if (op == "none") return 0.0;
  return 0.1;
}

namespace {

/// Longest input -> output path weight where node (or edge) weights are
/// 1 for conv-like ops. Nodes unreachable from the input are ignored.
double longest_conv_path(const ArchGraph& g, const SearchSpaceSpec& spec) {
  const int n = g.node_count();
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<double> best(n, kNone);
  int src = -1, dst = -1;
  for (int v = 0; v < n; ++v) {
    if (g.type(v) == spec.input_type() && src < 0) src = v;
    if (g.type(v) == spec.output_type()) dst = v;
  }
  if (src < 0 || dst < 0) return 0.0;
  best[src] = 0.0;
  // canonical graphs are upper triangular, so index order is topological
  for (int v = 0; v < n; ++v) {
    if (best[v] == kNone) continue;
    for (int w : g.successors(v)) {
      double add = 0.0;
      if (g.edge_labeled())
        add = is_conv_like(spec.op_vocabulary[*g.edge_op(v, w)]) ? 1.0 : 0.0;
      else if (spec.is_interior_type(g.type(w)))
        add = is_conv_like(spec.op_vocabulary[g.type(w) - 1]) ? 1.0 : 0.0;
      best[w] = std::max(best[w], best[v] + add);
    }
  }
  return best[dst] == kNone ? 0.0 : best[dst];
}

}  // namespace

double eval_target(const SyntheticTarget& target, const ArchGraph& g0, const SearchSpaceSpec& spec) {
  const ArchGraph g = g0.is_upper_triangular() ? g0 : canonicalize(g0);
  const int mx = spec.max_nodes;
  const int all_slots = mx * (mx - 1) / 2;
  double value = 0.0;
  if (target.kind == TargetKind::Depth) {
    const double depth = longest_conv_path(g, spec);
    double bonus = 0.0;
    double depth_max = 0.0, bonus_slots = 0.0;
    if (g.edge_labeled()) {
      for (auto [i, k] : g.edges()) bonus += op_bonus(spec.op_vocabulary[*g.edge_op(i, k)]);
      depth_max = mx - 1;
      bonus_slots = all_slots;
    } else {
      for (int v = 0; v < g.node_count(); ++v)
        if (spec.is_interior_type(g.type(v))) bonus += op_bonus(spec.op_vocabulary[g.type(v) - 1]);
      depth_max = mx - 2;
      bonus_slots = mx - 2;
    }
    value = 0.5;
    if (depth_max > 0) value += 0.4 * depth / depth_max;
    if (bonus_slots > 0) value += 0.1 * bonus / bonus_slots;
  } else {
    const double slots = spec.max_edges ? *spec.max_edges : all_slots;
    double conv = 0.0, count = 0.0;
    if (g.edge_labeled()) {
      for (auto [i, k] : g.edges()) {
        conv += is_conv_like(spec.op_vocabulary[*g.edge_op(i, k)]) ? 1.0 : 0.0;
        count += 1.0;
      }
    } else {
      for (int v = 0; v < g.node_count(); ++v)
        if (spec.is_interior_type(g.type(v))) {
          conv += is_conv_like(spec.op_vocabulary[g.type(v) - 1]) ? 1.0 : 0.0;
          count += 1.0;
        }
    }
    value = 0.4 + 0.5 * std::min(1.0, g.edge_count() / slots) + 0.1 * (count > 0 ? conv / count : 0.0);
  }
  return std::clamp(value, 0.0, 1.0);
}

std::vector<BenchRecord> build_fixture(const SearchSpaceSpec& spec, const SyntheticTarget& target,
                                       const EnumerationBudget& budget) {
  std::vector<BenchRecord> out;
  for (auto& g : enumerate_space(spec, budget)) {
    const double v = eval_target(target, g, spec);
    out.push_back({std::move(g), ArchMetrics{v, v, 0}});
  }
  return out;
}

}  // namespace dagvae
