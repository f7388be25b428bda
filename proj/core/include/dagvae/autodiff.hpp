#pragma once

#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dagvae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class ParamRegistry;
class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the
/// owning tape lives.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr && id_ >= 0; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Weights of one GRU cell: update gate (z), reset gate (r), candidate (n).
struct GruVars {
  Var w_z, u_z, b_z;
  Var w_r, u_r, b_r;
  Var w_n, u_n, b_n;
};

/// Records a fixed set of primitives and replays them backwards. Every
/// primitive checks shapes (ShapeMismatch) and traps non-finite results
/// (NonFiniteValue). A tape is single-threaded; independent tapes may run
/// concurrently against a shared read-only ParamRegistry.
class Tape {
 public:
  enum class Op {
    Constant, Leaf, Param,
    MatMul, Affine, Add, Sub, Scale, Hadamard,
    ConcatRows, RowSum, SumAll, SumOrdered, LookupColumn,
    Sigmoid, Relu, Tanh, Exp, Log,
    SoftmaxCrossEntropy, BernoulliBce, GruCell,
  };

  explicit Tape(const ParamRegistry* params = nullptr);
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var constant_scalar(double value);
  /// A requires-grad leaf not owned by a registry; read its gradient with grad().
  Var leaf(Matrix value);
  /// The registry parameter `name`; repeated requests return the same node.
  Var param(const std::string& name);
  Var param(int param_index);

  /// Reverse sweep from a 1x1 loss. Throws DetachedLoss for a handle from
  /// another tape, GraphConsumed when called twice without reset_grads().
  void backward(Var loss);
  void reset_grads();

  /// Gradient of a leaf or parameter node (zeros when unreachable).
  Matrix grad(Var v) const;
  /// (registry index, gradient) for every parameter read by this tape.
  std::vector<std::pair<int, Matrix>> param_grads() const;

  std::size_t size() const { return nodes_.size(); }
  const ParamRegistry* registry() const { return params_; }

 private:
  friend class Var;
  friend Var matmul(Var, Var);
  friend Var affine(Var, Var, Var);
  friend Var add(Var, Var);
  friend Var sub(Var, Var);
  friend Var scale(Var, double);
  friend Var hadamard(Var, Var);
  friend Var concat_rows(std::span<const Var>);
  friend Var row_sum(Var);
  friend Var sum(Var);
  friend Var sum_ordered(std::span<const Var>);
  friend Var lookup_column(Var, int);
  friend Var sigmoid(Var);
  friend Var relu(Var);
  friend Var tanh(Var);
  friend Var exp(Var);
  friend Var log(Var);
  friend Var softmax_cross_entropy(Var, int);
  friend Var bernoulli_bce(Var, double);
  friend Var gru_cell(Var, Var, const GruVars&);

  struct Node {
    Op op = Op::Constant;
    Matrix value;
    Matrix grad;
    std::vector<int> inputs;
    double scalar = 0.0;
    int index = 0;
    std::vector<Matrix> saved;
    bool needs_grad = false;
  };

  Var push(Node node, const char* op_name);
  const Node& node(Var v) const { return nodes_[v.id_]; }
  Node& node(Var v) { return nodes_[v.id_]; }
  void accumulate(int id, const Matrix& g);
  void backward_node(int id);

  const ParamRegistry* params_;
  std::vector<Node> nodes_;
  std::vector<int> param_node_;  // registry index -> node id or -1
  bool consumed_ = false;
};

Var matmul(Var a, Var b);
/// w * x + b with b (rows x 1) broadcast across the columns of x.
Var affine(Var w, Var x, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double c);
Var hadamard(Var a, Var b);
/// Stacks column blocks vertically; all parts share a column count.
Var concat_rows(std::span<const Var> parts);
inline Var concat_rows(std::initializer_list<Var> parts) {
  return concat_rows(std::span<const Var>(parts.begin(), parts.size()));
}
/// Sums across columns: rows x cols -> rows x 1.
Var row_sum(Var a);
/// Sum of all entries as a 1x1 value.
Var sum(Var a);
/// Elementwise sum of same-shaped terms. Each entry is accumulated in sorted
/// value order, so the result is bitwise independent of the order of terms.
Var sum_ordered(std::span<const Var> terms);
/// Column `index` of `table` as a rows x 1 value.
Var lookup_column(Var table, int index);
Var sigmoid(Var a);
Var relu(Var a);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
/// -log softmax(logits)[class_index] for a K x 1 logit column.
Var softmax_cross_entropy(Var logits, int class_index);
/// Binary cross-entropy of a 1x1 logit against target in [0, 1].
Var bernoulli_bce(Var logit, double target);
/// h' = (1 - z) * n + z * h with z, r sigmoid gates and n = tanh(W_n x + U_n (r * h) + b_n).
Var gru_cell(Var x, Var h, const GruVars& p);

/// Forward helpers with no tape, used by inference paths and tests.
double sigmoid_value(double x);
Vector softmax_values(const Eigen::Ref<const Vector>& logits);

}  // namespace dagvae
