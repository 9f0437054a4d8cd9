#ifndef GCAL_TENSOR_H_
#define GCAL_TENSOR_H_

// Dense matrices and a reverse-mode differentiation tape.
//
// Every numeric module builds its forward pass out of the primitives declared
// here. Each primitive evaluates eagerly, appends one node to the tape and
// registers the adjoint rule that backward() will replay. Matrices are
// row-major doubles; row vectors (1 x n) are the default vector shape.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace gcal {

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Parameter {
  std::string name;
  DenseMatrix value;
  DenseMatrix gradient;
};

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid until the tape is
// cleared.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int index) : tape_(tape), index_(index) {}

  const DenseMatrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;

  Tape* tape() const { return tape_; }
  int index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int index_ = -1;
};

class Tape {
 public:
  // Receives the gradient of the node's output and must add the adjoint
  // contributions into the parents' gradients via Tape::accumulate().
  using Backward = std::function<void(Tape& tape, const DenseMatrix& grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(DenseMatrix value);
  // Leaf bound to a trainable parameter. Repeated calls with the same
  // parameter return the same node.
  Var param(Parameter& parameter);

  // Appends an operation node. `backward` may be empty for nodes that do not
  // propagate (constants).
  Var record(DenseMatrix value, Backward backward);

  // Seeds d(loss)/d(loss) = 1 and walks the tape in exact reverse order,
  // adding leaf gradients into the bound Parameter::gradient.
  void backward(Var loss);

  // Adds `grad` into the gradient slot of `target`.
  void accumulate(Var target, const DenseMatrix& grad);
  template <typename Expr>
  void accumulate(Var target, const Eigen::MatrixBase<Expr>& grad) {
    slot(target) += grad;
  }

  // Adds row i of `grad` into row indices[i] of target's gradient.
  void accumulate_rows(Var target, std::span<const int> indices, const DenseMatrix& grad);

  const DenseMatrix& value(Var v) const { return nodes_[v.index()].value; }
  // Gradient accumulated for `v` by the last backward(); zeros if unreached.
  DenseMatrix grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  void clear();

  // Order in which the last backward() visited nodes (node indices).
  const std::vector<int>& last_backward_order() const { return visit_order_; }

 private:
  struct Node {
    DenseMatrix value;
    DenseMatrix grad;
    bool has_grad = false;
    Backward backward;
    Parameter* parameter = nullptr;
  };

  DenseMatrix& slot(Var target);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
  std::vector<int> visit_order_;
};

namespace ops {

// Shape-checked primitives. All throw Error(kShapeMismatch) when operand
// shapes do not close.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
// Adds a 1 x cols row to every row of `a`.
Var add_row(Var a, Var row);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);

Var tanh(Var a);
Var sigmoid(Var a);
Var leaky_relu(Var a, double slope = 0.01);
Var log(Var a);
// Values are clipped to [lo, hi]; the adjoint is zero where clipping applied.
Var clamp(Var a, double lo, double hi);

Var softmax_rows(Var a);
// Per-column mean across rows: (r x c) -> (1 x c).
Var mean_rows(Var a);
Var sum(Var a);

enum class Axis { kRows, kCols };
Var concat(Var a, Var b, Axis axis);
Var concat(std::span<const Var> parts, Axis axis);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
Var element(Var a, Eigen::Index row, Eigen::Index col);
// Selects rows of `table` by index (embedding lookup).
Var gather_rows(Var table, std::span<const int> indices);

}  // namespace ops

// Plain (non-recorded) helpers shared by tests and inference paths.
DenseMatrix softmax_rows(const DenseMatrix& m);
double leaky_relu(double x, double slope = 0.01);

}  // namespace gcal

#endif  // GCAL_TENSOR_H_
