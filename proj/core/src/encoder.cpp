#include "dagvae/encoder.hpp"

#include <cmath>

#include "dagvae/error.hpp"
#include "dagvae/nn.hpp"
#include "dagvae/rng.hpp"

namespace dagvae {

namespace {

void check_ops(const Model& model, const ArchGraph& g) {
  const SearchSpaceSpec& s = model.space();
  if (g.edge_labeled() != s.edge_labeled())
    throw Error(ErrorKind::UnknownOp, "graph label mode differs from the model's space");
  for (int v = 0; v < g.node_count(); ++v)
    if (g.type(v) < 0 || g.type(v) >= s.num_node_types())
      throw Error(ErrorKind::UnknownOp, "node type id " + std::to_string(g.type(v)));
  if (!g.edge_labeled()) return;
  for (auto [i, k] : g.edges()) {
    const int op = *g.edge_op(i, k);
    if (op < 0 || op >= s.num_ops()) throw Error(ErrorKind::UnknownOp, "edge op id " + std::to_string(op));
  }
}

}  // namespace

EncoderStates init_node_states(Tape& t, const Model& model, const ArchGraph& g) {
  check_ops(model, g);
  Var table = t.param(model.encoder().node_embed);
  EncoderStates s;
  for (int v = 0; v < g.node_count(); ++v) {
    Var h = lookup_column(table, g.type(v));
    s.fwd.push_back(h);
    s.bwd.push_back(h);
  }
  return s;
}

EncoderStates propagate(Tape& t, const Model& model, const ArchGraph& g, const EncoderStates& s) {
  const EncoderLayout& L = model.encoder();
  const int n = g.node_count();
  Var edge_table;
  if (g.edge_labeled()) edge_table = t.param(L.edge_embed);
  const GruVars gru_f = gru_vars(t, L.gru[0]);
  const GruVars gru_b = gru_vars(t, L.gru[1]);

  EncoderStates out;
  out.fwd.resize(n);
  out.bwd.resize(n);
  std::vector<Var> nb, eb;
  for (int v = 0; v < n; ++v) {
    nb.clear();
    eb.clear();
    for (int u : g.predecessors(v)) {
      nb.push_back(s.fwd[u]);
      if (g.edge_labeled()) eb.push_back(lookup_column(edge_table, *g.edge_op(u, v)));
    }
    out.fwd[v] = gru_cell(aggregate_messages(t, L.msg[0], s.fwd[v], nb, eb), s.fwd[v], gru_f);

    nb.clear();
    eb.clear();
    for (int u : g.successors(v)) {
      nb.push_back(s.bwd[u]);
      if (g.edge_labeled()) eb.push_back(lookup_column(edge_table, *g.edge_op(v, u)));
    }
    out.bwd[v] = gru_cell(aggregate_messages(t, L.msg[1], s.bwd[v], nb, eb), s.bwd[v], gru_b);
  }
  return out;
}

EncodedVars aggregate_graph(Tape& t, const Model& model, const EncoderStates& s) {
  std::vector<Var> h;
  h.reserve(s.fwd.size());
  for (std::size_t v = 0; v < s.fwd.size(); ++v) h.push_back(concat_rows({s.fwd[v], s.bwd[v]}));
  const EncoderLayout& L = model.encoder();
  return {gated_sum(t, L.mean_head, h), gated_sum(t, L.logvar_head, h)};
}

EncodedVars encode_on_tape(Tape& t, const Model& model, const ArchGraph& g) {
  EncoderStates s = init_node_states(t, model, g);
  for (int k = 0; k < model.config().rounds; ++k) s = propagate(t, model, g, s);
  return aggregate_graph(t, model, s);
}

GraphEmbedding encode(const Model& model, const ArchGraph& g) {
  Tape t(&model.params());
  EncodedVars e = encode_on_tape(t, model, g);
  return {e.mean.value().col(0), e.log_var.value().col(0)};
}

Var reparameterize(Tape& t, const EncodedVars& e, const Vector& eps) {
  Var std_dev = exp(scale(e.log_var, 0.5));
  return add(e.mean, hadamard(std_dev, t.constant(eps)));
}

Vector standard_normal(int dim, Rng& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.normal();
  return v;
}

Vector reparam_sample(const GraphEmbedding& emb, Rng& rng) {
  const Vector eps = standard_normal(static_cast<int>(emb.mean.size()), rng);
  return emb.mean + (0.5 * emb.log_var).array().exp().matrix().cwiseProduct(eps);
}

}  // namespace dagvae
