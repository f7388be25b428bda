#include "dagvae/decoder.hpp"

#include <algorithm>

#include "dagvae/canonical.hpp"
#include "dagvae/error.hpp"
#include "dagvae/nn.hpp"
#include "dagvae/rng.hpp"

namespace dagvae {

int DecodeTrace::edge_decisions() const {
  int n = 0;
  for (const auto& s : steps) n += static_cast<int>(s.edge_choices.size());
  return n;
}

NodeTypeId start_type(const SearchSpaceSpec& s, Direction d) {
  return d == Direction::Forward ? s.input_type() : s.output_type();
}

NodeTypeId end_type(const SearchSpaceSpec& s, Direction d) {
  return d == Direction::Forward ? s.output_type() : s.input_type();
}

int type_to_choice(const SearchSpaceSpec& s, Direction d, NodeTypeId type) {
  if (s.is_interior_type(type)) return type - 1;
  if (type == end_type(s, d)) return s.num_interior_types();
  return -1;
}

NodeTypeId choice_to_type(const SearchSpaceSpec& s, Direction d, int choice) {
  if (choice < 0 || choice > s.num_interior_types())
    throw Error(ErrorKind::UnknownOp, "node choice " + std::to_string(choice));
  return choice == s.num_interior_types() ? end_type(s, d) : choice + 1;
}

DirectionalSequence directional_sequence(const ArchGraph& g, Direction d) {
  const int n = g.node_count();
  auto orig = [&](int local) { return d == Direction::Forward ? local : n - 1 - local; };
  DirectionalSequence seq;
  seq.edge_choices.resize(n);
  for (int t = 0; t < n; ++t) {
    seq.types.push_back(g.type(orig(t)));
    for (int j = 0; j < t; ++j) {
      const int from = d == Direction::Forward ? orig(j) : orig(t);
      const int to = d == Direction::Forward ? orig(t) : orig(j);
      seq.edge_choices[t].push_back(g.slot(from, to));
    }
  }
  return seq;
}

ArchGraph orient_fragment(const ArchGraph& fragment, Direction d) {
  if (d == Direction::Forward) return fragment;
  const int n = fragment.node_count();
  std::vector<NodeTypeId> types(fragment.node_types().rbegin(), fragment.node_types().rend());
  ArchGraph g(std::move(types), fragment.edge_labeled());
  for (auto [j, t] : fragment.edges()) {
    if (fragment.edge_labeled())
      g.set_edge_op(n - 1 - t, n - 1 - j, *fragment.edge_op(j, t));
    else
      g.set_edge(n - 1 - t, n - 1 - j);
  }
  return g;
}

namespace {

int argmax_lowest(const Vector& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

int sample_categorical(const Vector& logits, Rng& rng) {
  const Vector p = softmax_values(logits);
  const double u = rng.uniform();
  double cum = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    cum += p(i);
    if (u < cum) return i;
  }
  return static_cast<int>(p.size()) - 1;
}

}  // namespace

int choose_type(const Vector& logits, DecodeMode mode, Rng& rng) {
  return mode == DecodeMode::Greedy ? argmax_lowest(logits) : sample_categorical(logits, rng);
}

int choose_edge(const Vector& logits, DecodeMode mode, Rng& rng) {
  if (logits.size() == 1) {
    const double p = sigmoid_value(logits(0));
    return mode == DecodeMode::Greedy ? (p > 0.5 ? 1 : 0) : (rng.uniform() < p ? 1 : 0);
  }
  return choose_type(logits, mode, rng);
}

// ---------------------------------------------------------------------------

Var init_start_node(Tape& t, const Model& m, Direction d, Var z, NodeTypeId type) {
  const DecoderLayout& L = m.decoder(static_cast<int>(d));
  Var emb = lookup_column(t.param(L.node_embed), type);
  return linear(t, L.init_start[1], relu(linear(t, L.init_start[0], concat_rows({z, emb}))));
}

Var init_node(Tape& t, const Model& m, Direction d, Var z, Var h_graph, NodeTypeId type) {
  const DecoderLayout& L = m.decoder(static_cast<int>(d));
  Var emb = lookup_column(t.param(L.node_embed), type);
  return linear(t, L.init[1], relu(linear(t, L.init[0], concat_rows({z, h_graph, emb}))));
}

Var add_node_logits(Tape& t, const Model& m, Direction d, Var z, Var h_graph) {
  const DecoderLayout& L = m.decoder(static_cast<int>(d));
  return linear(t, L.add_node[1], relu(linear(t, L.add_node[0], concat_rows({z, h_graph}))));
}

std::vector<Var> add_edge_logits(Tape& t, const Model& m, Direction d, Var h_new,
                                 std::span<const Var> prior, Var h_graph, Var z) {
  const DecoderLayout& L = m.decoder(static_cast<int>(d));
  Var shared = add(matmul(t.param(L.edge_w_new), h_new),
                   affine(t.param(L.edge_w_ctx), concat_rows({h_graph, z}), t.param(L.edge_b)));
  Var w_prior = t.param(L.edge_w_prior);
  std::vector<Var> out;
  out.reserve(prior.size());
  for (const Var& h : prior) out.push_back(linear(t, L.edge_out, relu(add(shared, matmul(w_prior, h)))));
  return out;
}

namespace {

/// Decides node types and edges; the teacher replays a sequence, the free
/// policy samples or takes the argmax.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int node(int step, const Vector& logits) = 0;
  virtual int edge(int step, int prior, const Vector& logits) = 0;
};

class TeacherPolicy : public Policy {
 public:
  TeacherPolicy(const SearchSpaceSpec& s, Direction d, DirectionalSequence seq)
      : spec_(s), dir_(d), seq_(std::move(seq)) {}
  int node(int step, const Vector&) override {
    if (step >= static_cast<int>(seq_.types.size()))
      throw Error(ErrorKind::UnknownOp, "sequence ends without the end type");
    const int c = type_to_choice(spec_, dir_, seq_.types.at(step));
    if (c < 0) throw Error(ErrorKind::UnknownOp, "type cannot be decoded at position " + std::to_string(step));
    return c;
  }
  int edge(int step, int prior, const Vector&) override { return seq_.edge_choices.at(step).at(prior); }

 private:
  const SearchSpaceSpec& spec_;
  Direction dir_;
  DirectionalSequence seq_;
};

class FreePolicy : public Policy {
 public:
  FreePolicy(DecodeMode mode, Rng& rng) : mode_(mode), rng_(rng) {}
  int node(int, const Vector& logits) override { return choose_type(logits, mode_, rng_); }
  int edge(int, int, const Vector& logits) override { return choose_edge(logits, mode_, rng_); }

 private:
  DecodeMode mode_;
  Rng& rng_;
};

struct RunResult {
  ArchGraph fragment;
  std::vector<Var> node_losses;
  std::vector<Var> edge_losses;
};

std::vector<Var> decoder_prop(Tape& t, const Model& m, Direction d, const std::vector<Var>& h,
                              const std::vector<std::vector<int>>& preds,
                              const std::vector<std::vector<int>>& succs, const ArchGraph& frag) {
  const DecoderLayout& L = m.decoder(static_cast<int>(d));
  const GruVars gru = gru_vars(t, L.gru);
  Var edge_table;
  if (frag.edge_labeled()) edge_table = t.param(L.edge_embed);
  std::vector<Var> out(h.size());
  std::vector<Var> nb, eb;
  for (std::size_t v = 0; v < h.size(); ++v) {
    nb.clear();
    eb.clear();
    for (int u : preds[v]) {
      nb.push_back(h[u]);
      if (frag.edge_labeled()) eb.push_back(lookup_column(edge_table, *frag.edge_op(u, static_cast<int>(v))));
    }
    Var a_in = aggregate_messages(t, L.msg_in, h[v], nb, eb);
    nb.clear();
    eb.clear();
    for (int u : succs[v]) {
      nb.push_back(h[u]);
      if (frag.edge_labeled()) eb.push_back(lookup_column(edge_table, *frag.edge_op(static_cast<int>(v), u)));
    }
    Var a_out = aggregate_messages(t, L.msg_out, h[v], nb, eb);
    out[v] = gru_cell(concat_rows({a_in, a_out}), h[v], gru);
  }
  return out;
}

RunResult run_direction(Tape& t, const Model& m, Direction d, Var z, Policy& policy, int max_steps,
                        bool with_loss, DecodeTrace* trace) {
  const SearchSpaceSpec& spec = m.space();
  const DecoderLayout& L = m.decoder(static_cast<int>(d));
  const bool labeled = spec.edge_labeled();
  const NodeTypeId stop = end_type(spec, d);
  const int end_choice = spec.num_interior_types();

  std::vector<NodeTypeId> types{start_type(spec, d)};
  std::vector<std::pair<std::pair<int, int>, int>> edges;  // ((j, t), slot)
  std::vector<std::vector<int>> preds(1), succs(1);
  ArchGraph frag(types, labeled);

  std::vector<Var> h{init_start_node(t, m, d, z, types[0])};
  Var h_graph = gated_sum(t, L.graph_head, h);
  RunResult r;

  for (int step = 1;; ++step) {
    Var logits = add_node_logits(t, m, d, z, h_graph);
    const Vector lv = logits.value().col(0);
    const bool forced = max_steps > 0 && step >= max_steps;
    int choice = forced ? end_choice : policy.node(step, lv);
    if (with_loss) r.node_losses.push_back(softmax_cross_entropy(logits, choice));
    const NodeTypeId type = choice_to_type(spec, d, choice);

    Var h_new = init_node(t, m, d, z, h_graph, type);
    std::vector<Var> edge_logits = add_edge_logits(t, m, d, h_new, h, h_graph, z);

    DecodeStep rec;
    rec.type_logits = lv;
    rec.type_choice = choice;
    rec.type = type;
    rec.forced = forced;
    types.push_back(type);
    preds.emplace_back();
    succs.emplace_back();
    for (int j = 0; j < step; ++j) {
      const Vector el = edge_logits[j].value().col(0);
      const int c = policy.edge(step, j, el);
      if (with_loss)
        r.edge_losses.push_back(labeled ? softmax_cross_entropy(edge_logits[j], c)
                                        : bernoulli_bce(edge_logits[j], c != 0 ? 1.0 : 0.0));
      if (c != 0) {
        edges.push_back({{j, step}, c});
        preds[step].push_back(j);
        succs[j].push_back(step);
      }
      if (trace) {
        rec.edge_logits.push_back(el);
        rec.edge_choices.push_back(c);
      }
    }
    if (trace) {
      if (forced) trace->truncated = true;
      trace->steps.push_back(std::move(rec));
    }
    h.push_back(h_new);
    if (type == stop) break;

    frag = ArchGraph(types, labeled);
    for (const auto& [e, c] : edges) {
      if (labeled)
        frag.set_edge_op(e.first, e.second, c - 1);
      else
        frag.set_edge(e.first, e.second);
    }
    h = decoder_prop(t, m, d, h, preds, succs, frag);
    h_graph = gated_sum(t, L.graph_head, h);
  }

  r.fragment = ArchGraph(types, labeled);
  for (const auto& [e, c] : edges) {
    if (labeled)
      r.fragment.set_edge_op(e.first, e.second, c - 1);
    else
      r.fragment.set_edge(e.first, e.second);
  }
  return r;
}

Var total(Tape& t, const std::vector<Var>& terms) {
  if (terms.empty()) return t.constant_scalar(0.0);
  if (terms.size() == 1) return terms[0];
  return sum(concat_rows(std::span<const Var>(terms)));
}

}  // namespace

DirectionalLoss directional_loss(Tape& t, const Model& m, Var z, const ArchGraph& g, Direction d,
                                 DecodeTrace* trace) {
  if (g.node_count() < 2) throw Error(ErrorKind::ShapeMismatch, "graph needs at least two nodes");
  DirectionalSequence seq = directional_sequence(g, d);
  if (seq.types[0] != start_type(m.space(), d))
    throw Error(ErrorKind::UnknownOp, "sequence does not begin with the start type");
  const int steps = g.node_count() - 1;
  TeacherPolicy teacher(m.space(), d, std::move(seq));
  RunResult r = run_direction(t, m, d, z, teacher, 0, true, trace);
  if (r.fragment.node_count() != g.node_count())
    throw Error(ErrorKind::UnknownOp, "end type appears before the last position");
  DirectionalLoss out;
  out.node = total(t, r.node_losses);
  out.edge = total(t, r.edge_losses);
  out.node_decisions = steps;
  out.edge_decisions = static_cast<int>(r.edge_losses.size());
  return out;
}

std::pair<ArchGraph, DecodeTrace> decode_directional(const Model& m, const Vector& z, Direction d,
                                                     DecodeMode mode, Rng& rng, int max_steps) {
  if (max_steps <= 0) max_steps = m.default_max_steps();
  if (max_steps < 2) throw Error(ErrorKind::ConfigError, "max_steps must be at least 2");
  Tape t(&m.params());
  Var zv = t.constant(z);
  FreePolicy policy(mode, rng);
  DecodeTrace trace;
  RunResult r = run_direction(t, m, d, zv, policy, max_steps, false, &trace);
  return {std::move(r.fragment), std::move(trace)};
}

ArchGraph union_fragments(const ArchGraph& forward, const ArchGraph& backward_local) {
  if (forward.node_count() != backward_local.node_count()) return forward;
  ArchGraph g = forward;
  const ArchGraph b = orient_fragment(backward_local, Direction::Backward);
  for (auto [i, k] : b.edges()) {
    if (g.has_edge(i, k)) continue;
    if (g.edge_labeled())
      g.set_edge_op(i, k, *b.edge_op(i, k));
    else
      g.set_edge(i, k);
  }
  return g;
}

ArchGraph decode(const Model& m, const Vector& z, DecodeMode mode, Rng& rng, int max_steps) {
  auto fwd = decode_directional(m, z, Direction::Forward, mode, rng, max_steps);
  auto bwd = decode_directional(m, z, Direction::Backward, mode, rng, max_steps);
  return canonicalize(union_fragments(fwd.first, bwd.first));
}

}  // namespace dagvae
