#include "dagvae/model.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dagvae/error.hpp"
#include "dagvae/record.hpp"
#include "dagvae/rng.hpp"
#include "json.hpp"

namespace dagvae {

using ojson = nlohmann::ordered_json;

void ModelConfig::validate() const {
  if (d_node < 1 || d_z < 1 || d_hidden < 1 || rounds < 0)
    throw Error(ErrorKind::ConfigError, "model sizes must be positive");
  for (int w : predictor_widths)
    if (w < 1) throw Error(ErrorKind::ConfigError, "predictor widths must be positive");
}

namespace {

class Builder {
 public:
  Builder(ParamRegistry& reg, std::uint64_t seed) : reg_(reg), rng_(mix_seed(seed, 0x6d6f64656c)) {}

  int weight(const std::string& name, int rows, int cols, int fan_in) {
    return reg_.add(name, init_uniform(rows, cols, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng_));
  }
  int table(const std::string& name, int rows, int cols) {
    return reg_.add(name, init_uniform(rows, cols, 1.0, rng_));
  }
  Linear linear(const std::string& name, int out, int in) {
    return {weight(name + ".w", out, in, in), weight(name + ".b", out, 1, in)};
  }
  GruIndices gru(const std::string& name, int in, int d) {
    GruIndices g;
    g.w_z = weight(name + ".w_z", d, in, d);
    g.u_z = weight(name + ".u_z", d, d, d);
    g.b_z = weight(name + ".b_z", d, 1, d);
    g.w_r = weight(name + ".w_r", d, in, d);
    g.u_r = weight(name + ".u_r", d, d, d);
    g.b_r = weight(name + ".b_r", d, 1, d);
    g.w_n = weight(name + ".w_n", d, in, d);
    g.u_n = weight(name + ".u_n", d, d, d);
    g.b_n = weight(name + ".b_n", d, 1, d);
    return g;
  }
  MessageIndices message(const std::string& name, int d, bool edges) {
    const int fan_in = edges ? 3 * d : 2 * d;
    MessageIndices m;
    m.w_src = weight(name + ".w_src", d, d, fan_in);
    m.w_dst = weight(name + ".w_dst", d, d, fan_in);
    m.b = weight(name + ".b", d, 1, fan_in);
    if (edges) m.w_edge = weight(name + ".w_edge", d, d, fan_in);
    return m;
  }
  GatedSumIndices gated(const std::string& name, int out, int in) {
    return {linear(name + ".phi", out, in), linear(name + ".psi", out, in)};
  }

 private:
  ParamRegistry& reg_;
  Rng rng_;
};

const char* kDir[2] = {"fwd", "bwd"};

}  // namespace

Model::Model(SearchSpaceSpec space, ModelConfig config, std::uint64_t seed)
    : space_(std::move(space)), config_(std::move(config)) {
  space_.validate();
  config_.validate();
  build(seed);
}

void Model::build(std::uint64_t seed) {
  Builder b(params_, seed);
  const int d = config_.d_node, dz = config_.d_z, hid = config_.d_hidden;
  const int types = space_.num_node_types();
  const bool edges = space_.edge_labeled();

  enc_.node_embed = b.table("enc.embed", d, types);
  if (edges) enc_.edge_embed = b.table("enc.edge_embed", d, space_.num_ops());
  for (int k = 0; k < 2; ++k) {
    const std::string p = std::string("enc.") + kDir[k];
    enc_.msg[k] = b.message(p + ".msg", d, edges);
    enc_.gru[k] = b.gru(p + ".gru", d, d);
  }
  enc_.mean_head = b.gated("enc.mean", dz, 2 * d);
  enc_.logvar_head = b.gated("enc.logvar", dz, 2 * d);

  for (int k = 0; k < 2; ++k) {
    DecoderLayout& L = dec_[k];
    const std::string p = std::string("dec.") + kDir[k];
    L.node_embed = b.table(p + ".embed", d, types);
    if (edges) L.edge_embed = b.table(p + ".edge_embed", d, space_.num_ops());
    L.init_start[0] = b.linear(p + ".init_start.0", hid, dz + d);
    L.init_start[1] = b.linear(p + ".init_start.1", d, hid);
    L.init[0] = b.linear(p + ".init.0", hid, 2 * dz + d);
    L.init[1] = b.linear(p + ".init.1", d, hid);
    L.add_node[0] = b.linear(p + ".add_node.0", hid, 2 * dz);
    L.add_node[1] = b.linear(p + ".add_node.1", node_choice_count(), hid);
    const int edge_in = 2 * d + 2 * dz;
    L.edge_w_new = b.weight(p + ".add_edges.0.w_new", hid, d, edge_in);
    L.edge_w_prior = b.weight(p + ".add_edges.0.w_prior", hid, d, edge_in);
    L.edge_w_ctx = b.weight(p + ".add_edges.0.w_ctx", hid, 2 * dz, edge_in);
    L.edge_b = b.weight(p + ".add_edges.0.b", hid, 1, edge_in);
    L.edge_out = b.linear(p + ".add_edges.1", edge_choice_count(), hid);
    L.msg_in = b.message(p + ".msg_in", d, edges);
    L.msg_out = b.message(p + ".msg_out", d, edges);
    L.gru = b.gru(p + ".gru", 2 * d, d);
    L.graph_head = b.gated(p + ".graph", dz, d);
  }

  int in = dz;
  for (std::size_t i = 0; i < config_.predictor_widths.size(); ++i) {
    pred_.layers.push_back(b.linear("pred." + std::to_string(i), config_.predictor_widths[i], in));
    in = config_.predictor_widths[i];
  }
  pred_.layers.push_back(b.linear("pred." + std::to_string(config_.predictor_widths.size()), 1, in));
}

std::vector<int> Model::encoder_and_predictor_params() const {
  const std::vector<std::string> prefixes{"enc.", "pred."};
  return params_.indices_with_prefix(prefixes);
}

// ---------------------------------------------------------------------------

namespace {

ojson matrix_json(const Matrix& m) {
  ojson a = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

Matrix matrix_from(const ojson& a, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != rows * cols)
    throw Error(ErrorKind::ParseError, "checkpoint: bad value count for " + what);
  Matrix m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = a[i++].get<double>();
  return m;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
  ojson j;
  j["format"] = "dagvae-checkpoint";
  j["version"] = 1;
  j["space"] = ojson::parse(space_to_json(model.space()));
  const ModelConfig& c = model.config();
  j["model"] = {{"d_node", c.d_node},
                {"d_z", c.d_z},
                {"d_hidden", c.d_hidden},
                {"rounds", c.rounds},
                {"predictor_widths", c.predictor_widths}};
  j["adam_step"] = model.params().adam_steps();
  ojson ps = ojson::array();
  for (const Parameter& p : model.params()) {
    ojson e;
    e["name"] = p.name;
    e["rows"] = p.value.rows();
    e["cols"] = p.value.cols();
    e["values"] = matrix_json(p.value);
    e["adam_m"] = matrix_json(p.adam_m);
    e["adam_v"] = matrix_json(p.adam_v);
    ps.push_back(std::move(e));
  }
  j["params"] = std::move(ps);
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write checkpoint '" + path + "'");
  out << j.dump() << '\n';
}

Model load_checkpoint(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw Error(ErrorKind::MissingCheckpoint, "no checkpoint at '" + path + "'");
  std::ifstream in(path);
  ojson j;
  try {
    j = ojson::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("checkpoint: ") + e.what());
  }
  try {
    if (j.value("format", "") != "dagvae-checkpoint")
      throw Error(ErrorKind::ParseError, "checkpoint: unknown format");
    if (j.value("version", 0) != 1) throw Error(ErrorKind::ParseError, "checkpoint: unsupported version");
    SearchSpaceSpec space = space_from_json(j.at("space").dump());
    ModelConfig c;
    const auto& m = j.at("model");
    c.d_node = m.at("d_node").get<int>();
    c.d_z = m.at("d_z").get<int>();
    c.d_hidden = m.at("d_hidden").get<int>();
    c.rounds = m.at("rounds").get<int>();
    c.predictor_widths = m.at("predictor_widths").get<std::vector<int>>();
    Model model(space, c, 0);
    ParamRegistry& reg = model.params();
    const auto& ps = j.at("params");
    if (ps.size() != reg.size()) throw Error(ErrorKind::ParseError, "checkpoint: parameter count differs");
    for (const auto& e : ps) {
      const std::string name = e.at("name").get<std::string>();
      auto id = reg.find(name);
      if (!id) throw Error(ErrorKind::ParseError, "checkpoint: unexpected parameter '" + name + "'");
      Parameter& p = reg.at(*id);
      const auto rows = e.at("rows").get<Eigen::Index>(), cols = e.at("cols").get<Eigen::Index>();
      if (rows != p.value.rows() || cols != p.value.cols())
        throw Error(ErrorKind::ParseError, "checkpoint: shape differs for '" + name + "'");
      p.value = matrix_from(e.at("values"), rows, cols, name);
      p.adam_m = matrix_from(e.at("adam_m"), rows, cols, name);
      p.adam_v = matrix_from(e.at("adam_v"), rows, cols, name);
    }
    reg.set_adam_steps(j.at("adam_step").get<std::int64_t>());
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("checkpoint: ") + e.what());
  }
}

}  // namespace dagvae
