#include "dagvae/graph.hpp"

#include <algorithm>
#include <set>

#include "dagvae/error.hpp"

namespace dagvae {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::GraphConsumed: return "GraphConsumed";
    case ErrorKind::DetachedLoss: return "DetachedLoss";
    case ErrorKind::MissingGrad: return "MissingGrad";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownOp: return "UnknownOp";
    case ErrorKind::DegenerateSpread: return "DegenerateSpread";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::OracleMiss: return "OracleMiss";
    case ErrorKind::MissingCheckpoint: return "MissingCheckpoint";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// SearchSpaceSpec

std::string SearchSpaceSpec::node_type_name(NodeTypeId t) const {
  if (t == input_type()) return "input";
  if (t == output_type()) return "output";
  if (is_interior_type(t)) return edge_labeled() ? "sum" : op_vocabulary[t - 1];
  return "type" + std::to_string(t);
}

std::optional<NodeTypeId> SearchSpaceSpec::node_type_from_name(const std::string& name) const {
  if (name == "input") return input_type();
  if (name == "output") return output_type();
  if (edge_labeled()) {
    if (name == "sum") return 1;
    return std::nullopt;
  }
  for (int i = 0; i < num_ops(); ++i)
    if (op_vocabulary[i] == name) return i + 1;
  return std::nullopt;
}

std::optional<int> SearchSpaceSpec::op_from_name(const std::string& name) const {
  for (int i = 0; i < num_ops(); ++i)
    if (op_vocabulary[i] == name) return i;
  return std::nullopt;
}

void SearchSpaceSpec::validate() const {
  if (op_vocabulary.empty()) throw Error(ErrorKind::ConfigError, "op_vocabulary is empty");
  if (max_nodes < 2) throw Error(ErrorKind::ConfigError, "max_nodes must be >= 2");
  std::set<std::string> seen;
  for (const auto& op : op_vocabulary) {
    if (op == "input" || op == "output" || op == "sum")
      throw Error(ErrorKind::ConfigError, "op name '" + op + "' is reserved");
    if (!seen.insert(op).second)
      throw Error(ErrorKind::ConfigError, "duplicate op name '" + op + "'");
  }
  if (max_edges && *max_edges < 0) throw Error(ErrorKind::ConfigError, "max_edges < 0");
  if (fixed_node_count && (*fixed_node_count < 2 || *fixed_node_count > max_nodes))
    throw Error(ErrorKind::ConfigError, "fixed_node_count outside [2, max_nodes]");
  if (fixed_dense_edges && !edge_labeled())
    throw Error(ErrorKind::ConfigError, "fixed_dense_edges requires an edge-labeled space");
}

namespace presets {

SearchSpaceSpec nb101_like() {
  SearchSpaceSpec s;
  s.name = "nb101";
  s.op_vocabulary = {"conv1x1-bn-relu", "conv3x3-bn-relu", "maxpool3x3"};
  s.max_nodes = 7;
  s.max_edges = 9;
  return s;
}

SearchSpaceSpec nb201_like() {
  SearchSpaceSpec s;
  s.name = "nb201";
  s.label_mode = LabelMode::EdgeLabeled;
  s.op_vocabulary = {"nor_conv_1x1", "nor_conv_3x3", "avg_pool_3x3", "skip_connect", "none"};
  s.max_nodes = 4;
  s.max_edges = 6;
  s.fixed_node_count = 4;
  s.fixed_dense_edges = true;
  return s;
}

SearchSpaceSpec enas_like() {
  SearchSpaceSpec s;
  s.name = "enas";
  s.op_vocabulary = {"conv3x3", "sep_conv3x3", "conv5x5", "sep_conv5x5", "avgpool3x3", "maxpool3x3"};
  s.max_nodes = 8;
  s.fixed_node_count = 8;
  return s;
}

SearchSpaceSpec mini(int max_nodes, int num_ops) {
  static const std::vector<std::string> kOps = {"conv3x3", "maxpool3x3", "conv1x1", "avgpool3x3"};
  if (num_ops < 1 || num_ops > static_cast<int>(kOps.size()))
    throw Error(ErrorKind::ConfigError, "mini preset supports 1..4 ops");
  SearchSpaceSpec s;
  s.name = "mini";
  s.op_vocabulary.assign(kOps.begin(), kOps.begin() + num_ops);
  s.max_nodes = max_nodes;
  return s;
}

SearchSpaceSpec mini4() {
  SearchSpaceSpec s = mini(4, 1);
  s.name = "mini4";
  s.fixed_node_count = 4;
  return s;
}

std::optional<SearchSpaceSpec> by_name(const std::string& name) {
  if (name == "nb101") return nb101_like();
  if (name == "nb201") return nb201_like();
  if (name == "enas") return enas_like();
  if (name == "mini") return mini();
  if (name == "mini4") return mini4();
  return std::nullopt;
}

}  // namespace presets

// ---------------------------------------------------------------------------
// ArchGraph

ArchGraph::ArchGraph(std::vector<NodeTypeId> node_types, bool edge_labeled)
    : types_(std::move(node_types)),
      adj_(types_.size() * types_.size(), 0),
      edge_labeled_(edge_labeled) {}

ArchGraph ArchGraph::from_edges(std::vector<NodeTypeId> node_types,
                                const std::vector<std::pair<int, int>>& edges) {
  ArchGraph g(std::move(node_types));
  for (auto [i, j] : edges) g.set_edge(i, j);
  return g;
}

std::optional<int> ArchGraph::edge_op(int from, int to) const {
  int s = slot(from, to);
  if (!edge_labeled_ || s == 0) return std::nullopt;
  return s - 1;
}

void ArchGraph::set_edge(int from, int to) {
  adj_[static_cast<std::size_t>(from) * types_.size() + to] = 1;
}

void ArchGraph::set_edge_op(int from, int to, int op) {
  edge_labeled_ = true;
  adj_[static_cast<std::size_t>(from) * types_.size() + to] = static_cast<std::int16_t>(op + 1);
}

void ArchGraph::clear_edge(int from, int to) {
  adj_[static_cast<std::size_t>(from) * types_.size() + to] = 0;
}

int ArchGraph::edge_count() const {
  return static_cast<int>(std::count_if(adj_.begin(), adj_.end(), [](auto s) { return s != 0; }));
}

std::vector<std::pair<int, int>> ArchGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  const int n = node_count();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (has_edge(i, j)) out.emplace_back(i, j);
  return out;
}

std::vector<int> ArchGraph::predecessors(int v) const {
  std::vector<int> out;
  for (int u = 0; u < node_count(); ++u)
    if (has_edge(u, v)) out.push_back(u);
  return out;
}

std::vector<int> ArchGraph::successors(int v) const {
  std::vector<int> out;
  for (int u = 0; u < node_count(); ++u)
    if (has_edge(v, u)) out.push_back(u);
  return out;
}

bool ArchGraph::is_upper_triangular() const {
  const int n = node_count();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      if (has_edge(i, j)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Validity

std::vector<bool> reachable_from(const ArchGraph& g, int source, bool backwards) {
  const int n = g.node_count();
  std::vector<bool> seen(n, false);
  if (source < 0 || source >= n) return seen;
  std::vector<int> stack{source};
  seen[source] = true;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v) {
      bool linked = backwards ? g.has_edge(v, u) : g.has_edge(u, v);
      if (linked && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

namespace {

ValidityReport check_impl(const ArchGraph& g, const SearchSpaceSpec& spec, int max_nodes,
                          std::optional<int> fixed_nodes, bool enforce_max_edges) {
  ValidityReport report;
  auto fail = [&](const char* name) {
    if (std::find(report.violations.begin(), report.violations.end(), name) ==
        report.violations.end())
      report.violations.emplace_back(name);
  };
  const int n = g.node_count();

  if (n < 2 || n > max_nodes || (fixed_nodes && n != *fixed_nodes)) fail("node_count");
  if (!g.is_upper_triangular()) fail("not_upper_triangular");
  if (enforce_max_edges && spec.max_edges && g.edge_count() > *spec.max_edges) fail("max_edges");

  if (n >= 1) {
    if (g.type(0) != spec.input_type()) fail("input_placement");
    if (g.type(n - 1) != spec.output_type()) fail("output_placement");
  }
  for (int v = 0; v < n; ++v) {
    NodeTypeId t = g.type(v);
    if (t < 0 || t >= spec.num_node_types()) {
      fail("unknown_op");
    } else if (v > 0 && v < n - 1) {
      if (t == spec.input_type()) fail("input_placement");
      if (t == spec.output_type()) fail("output_placement");
    }
  }

  for (auto [i, j] : g.edges()) {
    if (spec.edge_labeled()) {
      auto op = g.edge_op(i, j);
      if (!op || *op < 0 || *op >= spec.num_ops()) fail("unknown_op");
    } else if (g.slot(i, j) != 1) {
      fail("unknown_op");
    }
  }
  if (spec.fixed_dense_edges) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (!g.has_edge(i, j)) fail("dense_edges");
  }

  if (n >= 2) {
    auto fwd = reachable_from(g, 0, false);
    auto bwd = reachable_from(g, n - 1, true);
    for (int v = 0; v < n; ++v)
      if (!fwd[v] || !bwd[v]) fail("dangling_node");
  }

  report.is_valid = report.violations.empty();
  return report;
}

}  // namespace

ValidityReport check_validity(const ArchGraph& g, const SearchSpaceSpec& spec) {
  return check_impl(g, spec, spec.max_nodes, spec.fixed_node_count, true);
}

ValidityReport check_validity_relaxed(const ArchGraph& g, const SearchSpaceSpec& spec,
                                      int max_nodes, bool enforce_max_edges) {
  return check_impl(g, spec, max_nodes, std::nullopt, enforce_max_edges);
}

}  // namespace dagvae
