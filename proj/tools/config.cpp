#include "config.hpp"

#include <fstream>
#include <set>

#include "dagvae/error.hpp"
#include "json.hpp"

namespace dagvae::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(where + ": expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) bad(where + ": unknown key '" + k + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    bad(where + "." + key + ": wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

SyntheticTarget target_named(const std::string& name, const std::string& where) {
  auto t = target_by_name(name);
  if (!t) bad(where + ": unknown target '" + name + "' (depth, edge_density)");
  return *t;
}

}  // namespace

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    bad("config '" + path.string() + "': " + e.what());
  }
  allow_keys(j, "config",
             {"seed", "space", "data", "model", "train", "checkpoint", "metrics", "finetune", "bo", "extrapolate",
              "circle"});

  ExperimentConfig c;
  c.base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad("config.seed: expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("space")) {
    c.space = space_from_json(j["space"].dump());
    c.space_given = true;
  }

  if (j.contains("data")) {
    const json& d = j["data"];
    allow_keys(d, "data", {"records", "fixture"});
    if (d.contains("records") == d.contains("fixture")) bad("data: give exactly one of 'records' or 'fixture'");
    if (d.contains("records")) {
      std::string p;
      read(d, "records", p, "data");
      c.data.records = resolve(c.base_dir, p);
      if (!fs::exists(*c.data.records)) bad("data.records: no such file '" + c.data.records->string() + "'");
    } else {
      std::string t;
      read(d, "fixture", t, "data");
      c.data.fixture = target_named(t, "data.fixture");
    }
  }

  if (j.contains("model")) {
    const json& m = j["model"];
    allow_keys(m, "model", {"d_node", "d_z", "d_hidden", "rounds", "predictor_widths"});
    read(m, "d_node", c.model.d_node, "model");
    read(m, "d_z", c.model.d_z, "model");
    read(m, "d_hidden", c.model.d_hidden, "model");
    read(m, "rounds", c.model.rounds, "model");
    read(m, "predictor_widths", c.model.predictor_widths, "model");
  }
  c.model.validate();

  if (j.contains("train")) {
    const json& t = j["train"];
    allow_keys(t, "train", {"epochs", "batch_size", "lr", "alpha", "checkpoint_every"});
    read(t, "epochs", c.train.epochs, "train");
    read(t, "batch_size", c.train.batch_size, "train");
    read(t, "lr", c.train.lr, "train");
    read(t, "alpha", c.train.alpha, "train");
    read(t, "checkpoint_every", c.train.checkpoint_every, "train");
  }
  c.train.validate();

  if (j.contains("checkpoint")) {
    std::string p;
    read(j, "checkpoint", p, "config");
    c.checkpoint = resolve(c.base_dir, p);
  }

  if (j.contains("metrics")) {
    const json& m = j["metrics"];
    allow_keys(m, "metrics", {"n_z", "n_decode", "n_prior", "n_prior_decode"});
    read(m, "n_z", c.metrics.n_z, "metrics");
    read(m, "n_decode", c.metrics.n_decode, "metrics");
    read(m, "n_prior", c.metrics.n_prior, "metrics");
    read(m, "n_prior_decode", c.metrics.n_prior_decode, "metrics");
    if (c.metrics.n_z < 1 || c.metrics.n_decode < 1 || c.metrics.n_prior < 1 || c.metrics.n_prior_decode < 1)
      bad("metrics: counts must be positive");
  }

  if (j.contains("finetune")) {
    const json& f = j["finetune"];
    allow_keys(f, "finetune", {"epochs", "batch_size", "lr", "fraction"});
    read(f, "epochs", c.finetune.tune.epochs, "finetune");
    read(f, "batch_size", c.finetune.tune.batch_size, "finetune");
    read(f, "lr", c.finetune.tune.lr, "finetune");
    read(f, "fraction", c.finetune.fraction, "finetune");
    if (!(c.finetune.fraction > 0 && c.finetune.fraction <= 1)) bad("finetune.fraction: expected (0, 1]");
    if (c.finetune.tune.epochs < 0 || c.finetune.tune.batch_size < 1 || !(c.finetune.tune.lr > 0))
      bad("finetune: epochs >= 0, batch_size >= 1, lr > 0 required");
  }

  if (j.contains("bo")) {
    const json& b = j["bo"];
    allow_keys(b, "bo",
               {"iterations", "batch", "initial", "prior_samples", "m_inducing", "hyper_iters", "baseline"});
    read(b, "iterations", c.bo.bo.iterations, "bo");
    read(b, "batch", c.bo.bo.batch, "bo");
    read(b, "initial", c.bo.bo.initial, "bo");
    read(b, "prior_samples", c.bo.bo.prior_samples, "bo");
    read(b, "m_inducing", c.bo.bo.gp.m_inducing, "bo");
    read(b, "hyper_iters", c.bo.bo.gp.hyper_iters, "bo");
    read(b, "baseline", c.bo.baseline, "bo");
    if (c.bo.bo.iterations < 0 || c.bo.bo.batch < 1 || c.bo.bo.initial < 0 || c.bo.bo.prior_samples < 0 ||
        c.bo.bo.gp.m_inducing < 1 || c.bo.bo.gp.hyper_iters < 0)
      bad("bo: iterations >= 0, batch >= 1, m_inducing >= 1 required");
  }

  if (j.contains("extrapolate")) {
    const json& e = j["extrapolate"];
    allow_keys(e, "extrapolate", {"seed_graph", "top_k"});
    read(e, "top_k", c.extrapolate.top_k, "extrapolate");
    if (e.contains("seed_graph")) {
      if (!c.space_given) bad("extrapolate.seed_graph needs 'space'");
      try {
        c.extrapolate.seed_graph = deserialize_record(e["seed_graph"].dump(), c.space);
      } catch (const Error& err) {
        bad(std::string("extrapolate.seed_graph: ") + err.what());
      }
    }
  }

  if (j.contains("circle")) {
    const json& w = j["circle"];
    allow_keys(w, "circle", {"n", "radius"});
    read(w, "n", c.circle.n, "circle");
    read(w, "radius", c.circle.radius, "circle");
    if (c.circle.n < 1 || !(c.circle.radius > 0)) bad("circle: n >= 1 and radius > 0 required");
  }
  return c;
}

}  // namespace dagvae::cli
