#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dagvae/graph.hpp"

namespace dagvae {

struct ArchMetrics {
  double val_acc = 0.0;
  double test_acc = 0.0;
  int budget_epochs = 0;

  friend bool operator==(const ArchMetrics&, const ArchMetrics&) = default;
};

/// One (architecture, measured accuracies) pair.
struct BenchRecord {
  ArchGraph graph;
  std::optional<ArchMetrics> metrics;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

/// Single-line JSON object:
///   {"ops":[...],"adj":[[0|1,...],...],"edge_ops":[[op|null,...],...],
///    "metrics":{"val_acc":..,"test_acc":..,"budget_epochs":..}}
/// "edge_ops" is present only for edge-labeled graphs, "metrics" only when set.
std::string serialize_record(const BenchRecord& record, const SearchSpaceSpec& spec);

/// Throws ParseError naming the line (when nonzero) and the offending field.
BenchRecord deserialize_record(std::string_view text, const SearchSpaceSpec& spec,
                               int line_no = 0);

std::string serialize_graph(const ArchGraph& g, const SearchSpaceSpec& spec);

/// Reads a JSON-lines file; blank lines are skipped.
std::vector<BenchRecord> read_records(const std::string& path, const SearchSpaceSpec& spec);
void write_records(const std::string& path, const std::vector<BenchRecord>& records,
                   const SearchSpaceSpec& spec);

/// {"name":..,"label_mode":"node"|"edge","op_vocabulary":[..],"max_nodes":..,
///  "max_edges":int|null,"fixed_node_count":int|null,"fixed_dense_edges":bool}
std::string space_to_json(const SearchSpaceSpec& spec);
/// Accepts the object above or a preset name string. Throws ConfigError.
SearchSpaceSpec space_from_json(std::string_view text);

}  // namespace dagvae
