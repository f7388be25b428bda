#include "dagvae/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "dagvae/error.hpp"
#include "dagvae/params.hpp"

namespace dagvae {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

[[noreturn]] void shape_fail(const char* op, const std::string& detail) {
  throw Error(ErrorKind::ShapeMismatch, std::string(op) + ": " + detail);
}

Tape& same_tape(std::initializer_list<Var> vars, const char* op) {
  Tape* t = nullptr;
  for (const Var& v : vars) {
    if (!v.valid()) throw Error(ErrorKind::DetachedLoss, std::string(op) + ": invalid handle");
    if (t == nullptr) t = v.tape();
    if (v.tape() != t)
      throw Error(ErrorKind::DetachedLoss, std::string(op) + ": operands recorded on different tapes");
  }
  return *t;
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix sigmoid_matrix(const Matrix& x) { return x.unaryExpr([](double v) { return stable_sigmoid(v); }); }

}  // namespace

double sigmoid_value(double x) { return stable_sigmoid(x); }

Vector softmax_values(const Eigen::Ref<const Vector>& logits) {
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp();
  return e / e.sum();
}

const Matrix& Var::value() const { return tape_->nodes_[id_].value; }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) shape_fail("scalar", "value is " + shape(v));
  return v(0, 0);
}

// ---------------------------------------------------------------------------
// Tape

Tape::Tape(const ParamRegistry* params) : params_(params) {
  if (params_ != nullptr) param_node_.assign(params_->size(), -1);
  nodes_.reserve(256);
}

Var Tape::push(Node node, const char* op_name) {
  if (!node.value.allFinite())
    throw Error(ErrorKind::NonFiniteValue, std::string(op_name) + " produced a non-finite value");
  if (node.op != Op::Constant && node.op != Op::Leaf && node.op != Op::Param) {
    for (int in : node.inputs) node.needs_grad = node.needs_grad || nodes_[in].needs_grad;
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n), "constant");
}

Var Tape::constant_scalar(double value) { return constant(Matrix::Constant(1, 1, value)); }

Var Tape::leaf(Matrix value) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(value);
  n.needs_grad = true;
  return push(std::move(n), "leaf");
}

Var Tape::param(const std::string& name) {
  if (params_ == nullptr) throw Error(ErrorKind::ConfigError, "tape has no parameter registry");
  return param(params_->index(name));
}

Var Tape::param(int param_index) {
  if (params_ == nullptr) throw Error(ErrorKind::ConfigError, "tape has no parameter registry");
  if (param_index < 0 || static_cast<std::size_t>(param_index) >= params_->size())
    throw Error(ErrorKind::ConfigError, "parameter index out of range");
  if (param_node_.size() < params_->size()) param_node_.resize(params_->size(), -1);
  int& slot = param_node_[param_index];
  if (slot >= 0) return Var(this, slot);
  Node n;
  n.op = Op::Param;
  n.value = params_->at(param_index).value;
  n.index = param_index;
  n.needs_grad = true;
  Var v = push(std::move(n), "param");
  slot = v.id_;
  return v;
}

void Tape::accumulate(int id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0)
    n.grad = g;
  else
    n.grad += g;
}

void Tape::backward(Var loss) {
  if (!loss.valid() || loss.tape_ != this)
    throw Error(ErrorKind::DetachedLoss, "loss was not recorded on this tape");
  if (consumed_) throw Error(ErrorKind::GraphConsumed, "backward already ran on this tape");
  const Node& root = nodes_[loss.id_];
  if (root.value.size() != 1) shape_fail("backward", "loss must be 1x1, got " + shape(root.value));
  consumed_ = true;
  if (!root.needs_grad) return;
  nodes_[loss.id_].grad = Matrix::Ones(1, 1);
  for (int id = loss.id_; id >= 0; --id) {
    if (nodes_[id].grad.size() == 0) continue;
    backward_node(id);
  }
}

void Tape::reset_grads() {
  for (auto& n : nodes_) n.grad.resize(0, 0);
  consumed_ = false;
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id_);
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

std::vector<std::pair<int, Matrix>> Tape::param_grads() const {
  std::vector<std::pair<int, Matrix>> out;
  for (std::size_t i = 0; i < param_node_.size(); ++i) {
    int id = param_node_[i];
    if (id < 0 || nodes_[id].grad.size() == 0) continue;
    out.emplace_back(static_cast<int>(i), nodes_[id].grad);
  }
  return out;
}

void Tape::backward_node(int id) {
  Node& n = nodes_[id];
  const Matrix& g = n.grad;
  auto in = [&](int k) -> Node& { return nodes_[n.inputs[k]]; };
  switch (n.op) {
    case Op::Constant:
    case Op::Leaf:
    case Op::Param:
      break;
    case Op::MatMul:
      if (in(0).needs_grad) accumulate(n.inputs[0], g * in(1).value.transpose());
      if (in(1).needs_grad) accumulate(n.inputs[1], in(0).value.transpose() * g);
      break;
    case Op::Affine:
      if (in(0).needs_grad) accumulate(n.inputs[0], g * in(1).value.transpose());
      if (in(1).needs_grad) accumulate(n.inputs[1], in(0).value.transpose() * g);
      if (in(2).needs_grad) accumulate(n.inputs[2], g.rowwise().sum());
      break;
    case Op::Add:
      accumulate(n.inputs[0], g);
      accumulate(n.inputs[1], g);
      break;
    case Op::Sub:
      accumulate(n.inputs[0], g);
      accumulate(n.inputs[1], -g);
      break;
    case Op::Scale:
      accumulate(n.inputs[0], n.scalar * g);
      break;
    case Op::Hadamard:
      if (in(0).needs_grad) accumulate(n.inputs[0], g.cwiseProduct(in(1).value));
      if (in(1).needs_grad) accumulate(n.inputs[1], g.cwiseProduct(in(0).value));
      break;
    case Op::ConcatRows: {
      Eigen::Index offset = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const Eigen::Index r = nodes_[n.inputs[k]].value.rows();
        accumulate(n.inputs[k], g.middleRows(offset, r));
        offset += r;
      }
      break;
    }
    case Op::RowSum:
      accumulate(n.inputs[0], g.replicate(1, in(0).value.cols()));
      break;
    case Op::SumAll:
      accumulate(n.inputs[0], Matrix::Constant(in(0).value.rows(), in(0).value.cols(), g(0, 0)));
      break;
    case Op::SumOrdered:
      for (int k : n.inputs) accumulate(k, g);
      break;
    case Op::LookupColumn: {
      if (!in(0).needs_grad) break;
      Matrix full = Matrix::Zero(in(0).value.rows(), in(0).value.cols());
      full.col(n.index) = g;
      accumulate(n.inputs[0], full);
      break;
    }
    case Op::Sigmoid:
      accumulate(n.inputs[0], g.cwiseProduct(n.value.cwiseProduct((1.0 - n.value.array()).matrix())));
      break;
    case Op::Relu:
      accumulate(n.inputs[0], g.cwiseProduct(in(0).value.unaryExpr([](double x) { return x > 0 ? 1.0 : 0.0; })));
      break;
    case Op::Tanh:
      accumulate(n.inputs[0], g.cwiseProduct((1.0 - n.value.array().square()).matrix()));
      break;
    case Op::Exp:
      accumulate(n.inputs[0], g.cwiseProduct(n.value));
      break;
    case Op::Log:
      accumulate(n.inputs[0], g.cwiseQuotient(in(0).value));
      break;
    case Op::SoftmaxCrossEntropy: {
      Matrix d = n.saved[0];
      d(n.index, 0) -= 1.0;
      accumulate(n.inputs[0], g(0, 0) * d);
      break;
    }
    case Op::BernoulliBce: {
      const double s = in(0).value(0, 0);
      accumulate(n.inputs[0], Matrix::Constant(1, 1, g(0, 0) * (stable_sigmoid(s) - n.scalar)));
      break;
    }
    case Op::GruCell: {
      // inputs: x, h, w_z, u_z, b_z, w_r, u_r, b_r, w_n, u_n, b_n
      const Matrix& x = in(0).value;
      const Matrix& h = in(1).value;
      const Matrix& z = n.saved[0];
      const Matrix& r = n.saved[1];
      const Matrix& c = n.saved[2];
      const Matrix& rh = n.saved[3];
      const Matrix dz = g.cwiseProduct(h - c);
      const Matrix dc = g.cwiseProduct((1.0 - z.array()).matrix());
      Matrix dh = g.cwiseProduct(z);
      const Matrix dc_pre = dc.cwiseProduct((1.0 - c.array().square()).matrix());
      const Matrix drh = in(9).value.transpose() * dc_pre;
      const Matrix dr = drh.cwiseProduct(h);
      dh += drh.cwiseProduct(r);
      const Matrix dz_pre = dz.cwiseProduct(z.cwiseProduct((1.0 - z.array()).matrix()));
      const Matrix dr_pre = dr.cwiseProduct(r.cwiseProduct((1.0 - r.array()).matrix()));
      if (in(0).needs_grad)
        accumulate(n.inputs[0], in(2).value.transpose() * dz_pre + in(5).value.transpose() * dr_pre +
                                    in(8).value.transpose() * dc_pre);
      if (in(1).needs_grad)
        accumulate(n.inputs[1], dh + in(3).value.transpose() * dz_pre + in(6).value.transpose() * dr_pre);
      accumulate(n.inputs[2], dz_pre * x.transpose());
      accumulate(n.inputs[3], dz_pre * h.transpose());
      accumulate(n.inputs[4], dz_pre.rowwise().sum());
      accumulate(n.inputs[5], dr_pre * x.transpose());
      accumulate(n.inputs[6], dr_pre * h.transpose());
      accumulate(n.inputs[7], dr_pre.rowwise().sum());
      accumulate(n.inputs[8], dc_pre * x.transpose());
      accumulate(n.inputs[9], dc_pre * rh.transpose());
      accumulate(n.inputs[10], dc_pre.rowwise().sum());
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Primitives

Var matmul(Var a, Var b) {
  Tape& t = same_tape({a, b}, "matmul");
  if (a.cols() != b.rows())
    shape_fail("matmul", shape(a.value()) + " * " + shape(b.value()));
  Tape::Node n;
  n.op = Tape::Op::MatMul;
  n.value = a.value() * b.value();
  n.inputs = {a.id(), b.id()};
  return t.push(std::move(n), "matmul");
}

Var affine(Var w, Var x, Var b) {
  Tape& t = same_tape({w, x, b}, "affine");
  if (w.cols() != x.rows() || b.rows() != w.rows() || b.cols() != 1)
    shape_fail("affine", shape(w.value()) + " * " + shape(x.value()) + " + " + shape(b.value()));
  Tape::Node n;
  n.op = Tape::Op::Affine;
  n.value = w.value() * x.value();
  n.value.colwise() += b.value().col(0);
  n.inputs = {w.id(), x.id(), b.id()};
  return t.push(std::move(n), "affine");
}

Var add(Var a, Var b) {
  Tape& t = same_tape({a, b}, "add");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    shape_fail("add", shape(a.value()) + " + " + shape(b.value()));
  Tape::Node n;
  n.op = Tape::Op::Add;
  n.value = a.value() + b.value();
  n.inputs = {a.id(), b.id()};
  return t.push(std::move(n), "add");
}

Var sub(Var a, Var b) {
  Tape& t = same_tape({a, b}, "sub");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    shape_fail("sub", shape(a.value()) + " - " + shape(b.value()));
  Tape::Node n;
  n.op = Tape::Op::Sub;
  n.value = a.value() - b.value();
  n.inputs = {a.id(), b.id()};
  return t.push(std::move(n), "sub");
}

Var scale(Var a, double c) {
  Tape& t = same_tape({a}, "scale");
  Tape::Node n;
  n.op = Tape::Op::Scale;
  n.value = c * a.value();
  n.scalar = c;
  n.inputs = {a.id()};
  return t.push(std::move(n), "scale");
}

Var hadamard(Var a, Var b) {
  Tape& t = same_tape({a, b}, "hadamard");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    shape_fail("hadamard", shape(a.value()) + " . " + shape(b.value()));
  Tape::Node n;
  n.op = Tape::Op::Hadamard;
  n.value = a.value().cwiseProduct(b.value());
  n.inputs = {a.id(), b.id()};
  return t.push(std::move(n), "hadamard");
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) shape_fail("concat_rows", "no parts");
  Tape* t = parts[0].tape();
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts[0].valid() ? parts[0].cols() : 0;
  for (const Var& p : parts) {
    same_tape({parts[0], p}, "concat_rows");
    if (p.cols() != cols) shape_fail("concat_rows", "column counts differ");
    rows += p.rows();
  }
  Tape::Node n;
  n.op = Tape::Op::ConcatRows;
  n.value.resize(rows, cols);
  Eigen::Index offset = 0;
  for (const Var& p : parts) {
    n.value.middleRows(offset, p.rows()) = p.value();
    offset += p.rows();
    n.inputs.push_back(p.id());
  }
  return t->push(std::move(n), "concat_rows");
}

Var row_sum(Var a) {
  Tape& t = same_tape({a}, "row_sum");
  Tape::Node n;
  n.op = Tape::Op::RowSum;
  n.value = a.value().rowwise().sum();
  n.inputs = {a.id()};
  return t.push(std::move(n), "row_sum");
}

Var sum(Var a) {
  Tape& t = same_tape({a}, "sum");
  Tape::Node n;
  n.op = Tape::Op::SumAll;
  n.value = Matrix::Constant(1, 1, a.value().sum());
  n.inputs = {a.id()};
  return t.push(std::move(n), "sum");
}

Var sum_ordered(std::span<const Var> terms) {
  if (terms.empty()) shape_fail("sum_ordered", "no terms");
  Tape* t = terms[0].tape();
  const Eigen::Index rows = terms[0].rows(), cols = terms[0].cols();
  for (const Var& v : terms) {
    same_tape({terms[0], v}, "sum_ordered");
    if (v.rows() != rows || v.cols() != cols) shape_fail("sum_ordered", "term shapes differ");
  }
  Tape::Node n;
  n.op = Tape::Op::SumOrdered;
  n.value.resize(rows, cols);
  std::vector<double> buf(terms.size());
  auto before = [](double a, double b) {
    if (a != b) return a < b;
    return std::signbit(a) && !std::signbit(b);
  };
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k < terms.size(); ++k) buf[k] = terms[k].value()(r, c);
      std::sort(buf.begin(), buf.end(), before);
      double s = 0.0;
      for (double x : buf) s += x;
      n.value(r, c) = s;
    }
  for (const Var& v : terms) n.inputs.push_back(v.id());
  return t->push(std::move(n), "sum_ordered");
}

Var lookup_column(Var table, int index) {
  Tape& t = same_tape({table}, "lookup_column");
  if (index < 0 || index >= table.cols())
    shape_fail("lookup_column", "column " + std::to_string(index) + " of " + shape(table.value()));
  Tape::Node n;
  n.op = Tape::Op::LookupColumn;
  n.value = table.value().col(index);
  n.index = index;
  n.inputs = {table.id()};
  return t.push(std::move(n), "lookup_column");
}

Var sigmoid(Var a) {
  Tape& t = same_tape({a}, "sigmoid");
  Tape::Node n;
  n.op = Tape::Op::Sigmoid;
  n.value = sigmoid_matrix(a.value());
  n.inputs = {a.id()};
  return t.push(std::move(n), "sigmoid");
}

Var relu(Var a) {
  Tape& t = same_tape({a}, "relu");
  Tape::Node n;
  n.op = Tape::Op::Relu;
  n.value = a.value().cwiseMax(0.0);
  n.inputs = {a.id()};
  return t.push(std::move(n), "relu");
}

Var tanh(Var a) {
  Tape& t = same_tape({a}, "tanh");
  Tape::Node n;
  n.op = Tape::Op::Tanh;
  n.value = a.value().array().tanh().matrix();
  n.inputs = {a.id()};
  return t.push(std::move(n), "tanh");
}

Var exp(Var a) {
  Tape& t = same_tape({a}, "exp");
  Tape::Node n;
  n.op = Tape::Op::Exp;
  n.value = a.value().array().exp().matrix();
  n.inputs = {a.id()};
  return t.push(std::move(n), "exp");
}

Var log(Var a) {
  Tape& t = same_tape({a}, "log");
  Tape::Node n;
  n.op = Tape::Op::Log;
  n.value = a.value().array().log().matrix();
  n.inputs = {a.id()};
  return t.push(std::move(n), "log");
}

Var softmax_cross_entropy(Var logits, int class_index) {
  Tape& t = same_tape({logits}, "softmax_cross_entropy");
  if (logits.cols() != 1 || class_index < 0 || class_index >= logits.rows())
    shape_fail("softmax_cross_entropy",
               "class " + std::to_string(class_index) + " of " + shape(logits.value()));
  const Vector l = logits.value().col(0);
  const double m = l.maxCoeff();
  const double lse = m + std::log((l.array() - m).exp().sum());
  Tape::Node n;
  n.op = Tape::Op::SoftmaxCrossEntropy;
  n.value = Matrix::Constant(1, 1, lse - l(class_index));
  n.index = class_index;
  n.saved.push_back(softmax_values(l));
  n.inputs = {logits.id()};
  return t.push(std::move(n), "softmax_cross_entropy");
}

Var bernoulli_bce(Var logit, double target) {
  Tape& t = same_tape({logit}, "bernoulli_bce");
  if (logit.rows() != 1 || logit.cols() != 1) shape_fail("bernoulli_bce", "logit must be 1x1");
  const double s = logit.value()(0, 0);
  Tape::Node n;
  n.op = Tape::Op::BernoulliBce;
  n.value = Matrix::Constant(1, 1, std::max(s, 0.0) - s * target + std::log1p(std::exp(-std::abs(s))));
  n.scalar = target;
  n.inputs = {logit.id()};
  return t.push(std::move(n), "bernoulli_bce");
}

Var gru_cell(Var x, Var h, const GruVars& p) {
  Tape& t = same_tape({x, h, p.w_z, p.u_z, p.b_z, p.w_r, p.u_r, p.b_r, p.w_n, p.u_n, p.b_n},
                      "gru_cell");
  const Eigen::Index d = h.rows();
  auto check = [&](const Var& w, Eigen::Index cols, const char* what) {
    if (w.rows() != d || w.cols() != cols)
      shape_fail("gru_cell", std::string(what) + " is " + shape(w.value()));
  };
  check(p.w_z, x.rows(), "w_z");
  check(p.w_r, x.rows(), "w_r");
  check(p.w_n, x.rows(), "w_n");
  check(p.u_z, d, "u_z");
  check(p.u_r, d, "u_r");
  check(p.u_n, d, "u_n");
  check(p.b_z, 1, "b_z");
  check(p.b_r, 1, "b_r");
  check(p.b_n, 1, "b_n");
  if (x.cols() != h.cols()) shape_fail("gru_cell", "input and state column counts differ");

  const Matrix& xv = x.value();
  const Matrix& hv = h.value();
  Matrix z_pre = p.w_z.value() * xv + p.u_z.value() * hv;
  z_pre.colwise() += p.b_z.value().col(0);
  Matrix r_pre = p.w_r.value() * xv + p.u_r.value() * hv;
  r_pre.colwise() += p.b_r.value().col(0);
  Matrix z = sigmoid_matrix(z_pre);
  Matrix r = sigmoid_matrix(r_pre);
  Matrix rh = r.cwiseProduct(hv);
  Matrix c_pre = p.w_n.value() * xv + p.u_n.value() * rh;
  c_pre.colwise() += p.b_n.value().col(0);
  Matrix c = c_pre.array().tanh().matrix();

  Tape::Node n;
  n.op = Tape::Op::GruCell;
  n.value = (1.0 - z.array()).matrix().cwiseProduct(c) + z.cwiseProduct(hv);
  n.saved = {std::move(z), std::move(r), std::move(c), std::move(rh)};
  n.inputs = {x.id(),     h.id(),     p.w_z.id(), p.u_z.id(), p.b_z.id(), p.w_r.id(),
              p.u_r.id(), p.b_r.id(), p.w_n.id(), p.u_n.id(), p.b_n.id()};
  return t.push(std::move(n), "gru_cell");
}

}  // namespace dagvae
