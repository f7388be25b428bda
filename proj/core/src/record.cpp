#include "dagvae/record.hpp"

#include <fstream>

#include "dagvae/error.hpp"
#include "json.hpp"

namespace dagvae {

using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void parse_fail(int line_no, const std::string& field, const std::string& what) {
  std::string where = line_no > 0 ? "line " + std::to_string(line_no) + ": " : "";
  throw Error(ErrorKind::ParseError, where + "field '" + field + "': " + what);
}

ojson graph_json(const ArchGraph& g, const SearchSpaceSpec& spec) {
  const int n = g.node_count();
  ojson j;
  ojson ops = ojson::array();
  for (int v = 0; v < n; ++v) ops.push_back(spec.node_type_name(g.type(v)));
  j["ops"] = std::move(ops);
  ojson adj = ojson::array();
  for (int i = 0; i < n; ++i) {
    ojson row = ojson::array();
    for (int k = 0; k < n; ++k) row.push_back(g.has_edge(i, k) ? 1 : 0);
    adj.push_back(std::move(row));
  }
  j["adj"] = std::move(adj);
  if (g.edge_labeled()) {
    ojson eops = ojson::array();
    for (int i = 0; i < n; ++i) {
      ojson row = ojson::array();
      for (int k = 0; k < n; ++k) {
        auto op = g.edge_op(i, k);
        if (op)
          row.push_back(spec.op_vocabulary.at(*op));
        else
          row.push_back(nullptr);
      }
      eops.push_back(std::move(row));
    }
    j["edge_ops"] = std::move(eops);
  }
  return j;
}

}  // namespace

std::string serialize_graph(const ArchGraph& g, const SearchSpaceSpec& spec) {
  return graph_json(g, spec).dump();
}

std::string serialize_record(const BenchRecord& record, const SearchSpaceSpec& spec) {
  ojson j = graph_json(record.graph, spec);
  if (record.metrics) {
    ojson m;
    m["val_acc"] = record.metrics->val_acc;
    m["test_acc"] = record.metrics->test_acc;
    m["budget_epochs"] = record.metrics->budget_epochs;
    j["metrics"] = std::move(m);
  }
  return j.dump();
}

BenchRecord deserialize_record(std::string_view text, const SearchSpaceSpec& spec, int line_no) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    parse_fail(line_no, "<record>", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) parse_fail(line_no, "<record>", "expected a JSON object");

  if (!j.contains("ops") || !j["ops"].is_array()) parse_fail(line_no, "ops", "missing or not an array");
  const auto& ops = j["ops"];
  const int n = static_cast<int>(ops.size());
  if (n < 2) parse_fail(line_no, "ops", "need at least 2 nodes");
  std::vector<NodeTypeId> types;
  types.reserve(n);
  for (int v = 0; v < n; ++v) {
    if (!ops[v].is_string()) parse_fail(line_no, "ops", "entry " + std::to_string(v) + " is not a string");
    auto t = spec.node_type_from_name(ops[v].get<std::string>());
    if (!t) parse_fail(line_no, "ops", "op not in vocabulary: '" + ops[v].get<std::string>() + "'");
    types.push_back(*t);
  }

  if (!j.contains("adj") || !j["adj"].is_array()) parse_fail(line_no, "adj", "missing or not an array");
  const auto& adj = j["adj"];
  if (static_cast<int>(adj.size()) != n) parse_fail(line_no, "adj", "not square / size differs from ops");
  const bool labeled = j.contains("edge_ops") && !j["edge_ops"].is_null();
  if (spec.edge_labeled() && !labeled) parse_fail(line_no, "edge_ops", "required for edge-labeled spaces");
  if (!spec.edge_labeled() && labeled) parse_fail(line_no, "edge_ops", "not allowed for node-labeled spaces");

  ArchGraph g(std::move(types), labeled);
  for (int i = 0; i < n; ++i) {
    const auto& row = adj[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n) parse_fail(line_no, "adj", "not square");
    for (int k = 0; k < n; ++k) {
      if (!row[k].is_number_integer()) parse_fail(line_no, "adj", "entries must be 0 or 1");
      int bit = row[k].get<int>();
      if (bit != 0 && bit != 1) parse_fail(line_no, "adj", "entries must be 0 or 1");
      if (bit == 0) continue;
      if (k <= i) parse_fail(line_no, "adj", "not upper triangular");
      if (!labeled) {
        g.set_edge(i, k);
        continue;
      }
      const auto& eops = j["edge_ops"];
      if (!eops.is_array() || static_cast<int>(eops.size()) != n || !eops[i].is_array() ||
          static_cast<int>(eops[i].size()) != n)
        parse_fail(line_no, "edge_ops", "shape differs from adj");
      const auto& cell = eops[i][k];
      if (!cell.is_string()) parse_fail(line_no, "edge_ops", "edge without an op");
      auto op = spec.op_from_name(cell.get<std::string>());
      if (!op) parse_fail(line_no, "edge_ops", "op not in vocabulary: '" + cell.get<std::string>() + "'");
      g.set_edge_op(i, k, *op);
    }
  }

  BenchRecord record{std::move(g), std::nullopt};
  if (j.contains("metrics") && !j["metrics"].is_null()) {
    const auto& m = j["metrics"];
    if (!m.is_object()) parse_fail(line_no, "metrics", "expected an object");
    ArchMetrics metrics;
    try {
      metrics.val_acc = m.at("val_acc").get<double>();
      metrics.test_acc = m.at("test_acc").get<double>();
      metrics.budget_epochs = m.contains("budget_epochs") ? m["budget_epochs"].get<int>() : 0;
    } catch (const nlohmann::json::exception& e) {
      parse_fail(line_no, "metrics", e.what());
    }
    record.metrics = metrics;
  }
  return record;
}

std::vector<BenchRecord> read_records(const std::string& path, const SearchSpaceSpec& spec) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::vector<BenchRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(deserialize_record(line, spec, line_no));
  }
  return out;
}

void write_records(const std::string& path, const std::vector<BenchRecord>& records,
                   const SearchSpaceSpec& spec) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write '" + path + "'");
  for (const auto& r : records) out << serialize_record(r, spec) << '\n';
}

std::string space_to_json(const SearchSpaceSpec& spec) {
  ojson j;
  j["name"] = spec.name;
  j["label_mode"] = spec.edge_labeled() ? "edge" : "node";
  j["op_vocabulary"] = spec.op_vocabulary;
  j["max_nodes"] = spec.max_nodes;
  j["max_edges"] = spec.max_edges ? ojson(*spec.max_edges) : ojson(nullptr);
  j["fixed_node_count"] = spec.fixed_node_count ? ojson(*spec.fixed_node_count) : ojson(nullptr);
  j["fixed_dense_edges"] = spec.fixed_dense_edges;
  return j.dump();
}

SearchSpaceSpec space_from_json(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("space: ") + e.what());
  }
  if (j.is_string()) {
    auto p = presets::by_name(j.get<std::string>());
    if (!p) throw Error(ErrorKind::ConfigError, "unknown space preset '" + j.get<std::string>() + "'");
    return *p;
  }
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "space must be a preset name or an object");
  SearchSpaceSpec s;
  try {
    if (j.contains("preset")) {
      auto p = presets::by_name(j["preset"].get<std::string>());
      if (!p) throw Error(ErrorKind::ConfigError, "unknown space preset '" + j["preset"].get<std::string>() + "'");
      s = *p;
    }
    if (j.contains("name")) s.name = j["name"].get<std::string>();
    if (j.contains("label_mode")) {
      const auto m = j["label_mode"].get<std::string>();
      if (m == "node")
        s.label_mode = LabelMode::NodeLabeled;
      else if (m == "edge")
        s.label_mode = LabelMode::EdgeLabeled;
      else
        throw Error(ErrorKind::ConfigError, "label_mode must be 'node' or 'edge'");
    }
    if (j.contains("op_vocabulary")) s.op_vocabulary = j["op_vocabulary"].get<std::vector<std::string>>();
    if (j.contains("max_nodes")) s.max_nodes = j["max_nodes"].get<int>();
    if (j.contains("max_edges"))
      s.max_edges = j["max_edges"].is_null() ? std::nullopt : std::optional<int>(j["max_edges"].get<int>());
    if (j.contains("fixed_node_count"))
      s.fixed_node_count = j["fixed_node_count"].is_null()
                               ? std::nullopt
                               : std::optional<int>(j["fixed_node_count"].get<int>());
    if (j.contains("fixed_dense_edges")) s.fixed_dense_edges = j["fixed_dense_edges"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("space: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace dagvae
