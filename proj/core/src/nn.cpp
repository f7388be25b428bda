#include "dagvae/nn.hpp"

namespace dagvae {

Var linear(Tape& t, const Linear& l, Var x) { return affine(t.param(l.w), x, t.param(l.b)); }

GruVars gru_vars(Tape& t, const GruIndices& g) {
  return {t.param(g.w_z), t.param(g.u_z), t.param(g.b_z), t.param(g.w_r), t.param(g.u_r),
          t.param(g.b_r), t.param(g.w_n), t.param(g.u_n), t.param(g.b_n)};
}

Var aggregate_messages(Tape& t, const MessageIndices& m, Var self, std::span<const Var> neighbors,
                       std::span<const Var> edge_embeds) {
  if (neighbors.empty()) return t.constant(Matrix::Zero(self.rows(), 1));
  Var src = matmul(t.param(m.w_src), sum_ordered(neighbors));
  Var dst = affine(t.param(m.w_dst), self, t.param(m.b));
  Var a = add(src, scale(dst, static_cast<double>(neighbors.size())));
  if (!edge_embeds.empty()) a = add(a, matmul(t.param(m.w_edge), sum_ordered(edge_embeds)));
  return a;
}

Var gated_sum(Tape& t, const GatedSumIndices& g, std::span<const Var> states) {
  std::vector<Var> terms;
  terms.reserve(states.size());
  for (const Var& h : states) terms.push_back(hadamard(sigmoid(linear(t, g.phi, h)), linear(t, g.psi, h)));
  return sum_ordered(terms);
}

}  // namespace dagvae
