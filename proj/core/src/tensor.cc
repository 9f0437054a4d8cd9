#include "gcal/tensor.h"

#include <cassert>
#include <cmath>
#include <sstream>

#include "gcal/error.h"

namespace gcal {
namespace {

std::string Shape(const DenseMatrix& m) {
  std::ostringstream out;
  out << m.rows() << "x" << m.cols();
  return out.str();
}

void RequireSameTape(Var a, Var b) {
  if (a.tape() != b.tape()) {
    throw Error(ErrorCode::kInvalidArgument, "operands live on different tapes");
  }
}

void RequireSameShape(const char* op, Var a, Var b) {
  RequireSameTape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + ": " + Shape(a.value()) + " vs " + Shape(b.value()));
  }
}

}  // namespace

const DenseMatrix& Var::value() const { return tape_->value(*this); }

double Var::scalar() const {
  const DenseMatrix& v = value();
  if (v.size() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "scalar() on " + Shape(v));
  }
  return v(0, 0);
}

Var Tape::constant(DenseMatrix value) { return record(std::move(value), {}); }

Var Tape::param(Parameter& parameter) {
  auto it = param_nodes_.find(&parameter);
  if (it != param_nodes_.end()) return Var(this, it->second);
  Var v = record(parameter.value, {});
  nodes_[v.index()].parameter = &parameter;
  param_nodes_.emplace(&parameter, v.index());
  return v;
}

Var Tape::record(DenseMatrix value, Backward backward) {
  assert(value.allFinite() && "non-finite value recorded on tape");
  Node node;
  node.value = std::move(value);
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

DenseMatrix& Tape::slot(Var target) {
  Node& node = nodes_[target.index()];
  if (!node.has_grad) {
    node.grad = DenseMatrix::Zero(node.value.rows(), node.value.cols());
    node.has_grad = true;
  }
  return node.grad;
}

void Tape::accumulate(Var target, const DenseMatrix& grad) { slot(target) += grad; }

void Tape::accumulate_rows(Var target, std::span<const int> indices, const DenseMatrix& grad) {
  DenseMatrix& g = slot(target);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    g.row(indices[i]) += grad.row(static_cast<Eigen::Index>(i));
  }
}

DenseMatrix Tape::grad(Var v) const {
  const Node& node = nodes_[v.index()];
  if (!node.has_grad) {
    return DenseMatrix::Zero(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) {
    throw Error(ErrorCode::kInvalidArgument, "loss recorded on another tape");
  }
  if (loss.value().size() != 1) {
    throw Error(ErrorCode::kNonScalarLoss, "loss has shape " + Shape(loss.value()));
  }
  for (Node& node : nodes_) {
    node.has_grad = false;
    node.grad.resize(0, 0);
  }
  visit_order_.clear();
  slot(loss).setOnes();
  for (int i = loss.index(); i >= 0; --i) {
    visit_order_.push_back(i);
    Node& node = nodes_[i];
    if (!node.has_grad) continue;
    if (node.parameter != nullptr) {
      Parameter& p = *node.parameter;
      if (p.gradient.rows() != p.value.rows() || p.gradient.cols() != p.value.cols()) {
        p.gradient = DenseMatrix::Zero(p.value.rows(), p.value.cols());
      }
      p.gradient += node.grad;
    }
    if (node.backward) {
      // The closure may grow nodes_ storage of earlier indices only, so the
      // incoming gradient is moved out before the call.
      DenseMatrix g = std::move(node.grad);
      node.backward(*this, g);
      nodes_[i].grad = std::move(g);
    }
  }
}

void Tape::clear() {
  nodes_.clear();
  param_nodes_.clear();
  visit_order_.clear();
}

namespace ops {

Var matmul(Var a, Var b) {
  RequireSameTape(a, b);
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kShapeMismatch,
                "matmul: " + Shape(a.value()) + " x " + Shape(b.value()));
  }
  Tape& t = *a.tape();
  return t.record(a.value() * b.value(), [a, b](Tape& t, const DenseMatrix& g) {
    t.accumulate(a, g * b.value().transpose());
    t.accumulate(b, a.value().transpose() * g);
  });
}

Var transpose(Var a) {
  Tape& t = *a.tape();
  return t.record(a.value().transpose(),
                  [a](Tape& t, const DenseMatrix& g) { t.accumulate(a, g.transpose()); });
}

Var add(Var a, Var b) {
  RequireSameShape("add", a, b);
  Tape& t = *a.tape();
  return t.record(a.value() + b.value(), [a, b](Tape& t, const DenseMatrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  RequireSameShape("sub", a, b);
  Tape& t = *a.tape();
  return t.record(a.value() - b.value(), [a, b](Tape& t, const DenseMatrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var mul(Var a, Var b) {
  RequireSameShape("mul", a, b);
  Tape& t = *a.tape();
  return t.record(a.value().cwiseProduct(b.value()), [a, b](Tape& t, const DenseMatrix& g) {
    t.accumulate(a, g.cwiseProduct(b.value()));
    t.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var add_row(Var a, Var row) {
  RequireSameTape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw Error(ErrorCode::kShapeMismatch,
                "add_row: " + Shape(a.value()) + " + " + Shape(row.value()));
  }
  Tape& t = *a.tape();
  DenseMatrix out = a.value();
  out.rowwise() += row.value().row(0);
  return t.record(std::move(out), [a, row](Tape& t, const DenseMatrix& g) {
    t.accumulate(a, g);
    t.accumulate(row, g.colwise().sum());
  });
}

Var scale(Var a, double factor) {
  Tape& t = *a.tape();
  return t.record(a.value() * factor,
                  [a, factor](Tape& t, const DenseMatrix& g) { t.accumulate(a, g * factor); });
}

Var add_scalar(Var a, double offset) {
  Tape& t = *a.tape();
  return t.record(a.value().array() + offset,
                  [a](Tape& t, const DenseMatrix& g) { t.accumulate(a, g); });
}

Var tanh(Var a) {
  Tape& t = *a.tape();
  const int self = static_cast<int>(t.size());
  return t.record(a.value().array().tanh(), [a, self](Tape& t, const DenseMatrix& g) {
    const DenseMatrix& y = t.value(Var(&t, self));
    t.accumulate(a, g.array() * (1.0 - y.array().square()));
  });
}

Var sigmoid(Var a) {
  Tape& t = *a.tape();
  const int self = static_cast<int>(t.size());
  DenseMatrix y = (1.0 + (-a.value().array()).exp()).inverse();
  return t.record(std::move(y), [a, self](Tape& t, const DenseMatrix& g) {
    const DenseMatrix& y = t.value(Var(&t, self));
    t.accumulate(a, g.array() * y.array() * (1.0 - y.array()));
  });
}

Var leaky_relu(Var a, double slope) {
  Tape& t = *a.tape();
  DenseMatrix y = a.value().unaryExpr([slope](double x) { return gcal::leaky_relu(x, slope); });
  return t.record(std::move(y), [a, slope](Tape& t, const DenseMatrix& g) {
    DenseMatrix d = a.value().unaryExpr([slope](double x) { return x >= 0.0 ? 1.0 : slope; });
    t.accumulate(a, g.cwiseProduct(d));
  });
}

Var log(Var a) {
  Tape& t = *a.tape();
  return t.record(a.value().array().log(), [a](Tape& t, const DenseMatrix& g) {
    t.accumulate(a, g.array() / a.value().array());
  });
}

Var clamp(Var a, double lo, double hi) {
  Tape& t = *a.tape();
  DenseMatrix y = a.value().cwiseMax(lo).cwiseMin(hi);
  return t.record(std::move(y), [a, lo, hi](Tape& t, const DenseMatrix& g) {
    DenseMatrix d =
        a.value().unaryExpr([lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
    t.accumulate(a, g.cwiseProduct(d));
  });
}

Var softmax_rows(Var a) {
  Tape& t = *a.tape();
  const int self = static_cast<int>(t.size());
  return t.record(gcal::softmax_rows(a.value()), [a, self](Tape& t, const DenseMatrix& g) {
    const DenseMatrix& y = t.value(Var(&t, self));
    // dx = y * (g - <g, y>) row by row
    Eigen::VectorXd dots = g.cwiseProduct(y).rowwise().sum();
    DenseMatrix dx = g;
    dx.colwise() -= dots;
    t.accumulate(a, dx.cwiseProduct(y));
  });
}

Var mean_rows(Var a) {
  Tape& t = *a.tape();
  const double n = static_cast<double>(a.rows());
  if (a.rows() == 0) {
    throw Error(ErrorCode::kShapeMismatch, "mean_rows of an empty matrix");
  }
  return t.record(a.value().colwise().mean(), [a, n](Tape& t, const DenseMatrix& g) {
    DenseMatrix d = g.replicate(a.rows(), 1) / n;
    t.accumulate(a, d);
  });
}

Var sum(Var a) {
  Tape& t = *a.tape();
  DenseMatrix y(1, 1);
  y(0, 0) = a.value().sum();
  return t.record(std::move(y), [a](Tape& t, const DenseMatrix& g) {
    t.accumulate(a, DenseMatrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var concat(Var a, Var b, Axis axis) {
  const Var parts[] = {a, b};
  return concat(parts, axis);
}

Var concat(std::span<const Var> parts, Axis axis) {
  if (parts.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "concat of zero operands");
  }
  Tape& t = *parts.front().tape();
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    RequireSameTape(parts.front(), p);
    if (axis == Axis::kCols) {
      if (p.rows() != parts.front().rows()) {
        throw Error(ErrorCode::kShapeMismatch,
                    "concat(cols): " + Shape(parts.front().value()) + " vs " + Shape(p.value()));
      }
      cols += p.cols();
    } else {
      if (p.cols() != parts.front().cols()) {
        throw Error(ErrorCode::kShapeMismatch,
                    "concat(rows): " + Shape(parts.front().value()) + " vs " + Shape(p.value()));
      }
      rows += p.rows();
    }
  }
  if (axis == Axis::kCols) rows = parts.front().rows();
  if (axis == Axis::kRows) cols = parts.front().cols();
  DenseMatrix out(rows, cols);
  Eigen::Index offset = 0;
  for (const Var& p : parts) {
    if (axis == Axis::kCols) {
      out.middleCols(offset, p.cols()) = p.value();
      offset += p.cols();
    } else {
      out.middleRows(offset, p.rows()) = p.value();
      offset += p.rows();
    }
  }
  std::vector<Var> saved(parts.begin(), parts.end());
  return t.record(std::move(out), [saved, axis](Tape& t, const DenseMatrix& g) {
    Eigen::Index off = 0;
    for (const Var& p : saved) {
      if (axis == Axis::kCols) {
        t.accumulate(p, g.middleCols(off, p.cols()));
        off += p.cols();
      } else {
        t.accumulate(p, g.middleRows(off, p.rows()));
        off += p.rows();
      }
    }
  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "slice_rows out of range");
  }
  Tape& t = *a.tape();
  return t.record(a.value().middleRows(start, count),
                  [a, start, count](Tape& t, const DenseMatrix& g) {
                    DenseMatrix d = DenseMatrix::Zero(a.rows(), a.cols());
                    d.middleRows(start, count) = g;
                    t.accumulate(a, d);
                  });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "slice_cols out of range");
  }
  Tape& t = *a.tape();
  return t.record(a.value().middleCols(start, count),
                  [a, start, count](Tape& t, const DenseMatrix& g) {
                    DenseMatrix d = DenseMatrix::Zero(a.rows(), a.cols());
                    d.middleCols(start, count) = g;
                    t.accumulate(a, d);
                  });
}

Var element(Var a, Eigen::Index row, Eigen::Index col) {
  if (row < 0 || col < 0 || row >= a.rows() || col >= a.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "element index out of range");
  }
  Tape& t = *a.tape();
  DenseMatrix y(1, 1);
  y(0, 0) = a.value()(row, col);
  return t.record(std::move(y), [a, row, col](Tape& t, const DenseMatrix& g) {
    DenseMatrix d = DenseMatrix::Zero(a.rows(), a.cols());
    d(row, col) = g(0, 0);
    t.accumulate(a, d);
  });
}

Var gather_rows(Var table, std::span<const int> indices) {
  Tape& t = *table.tape();
  DenseMatrix out(static_cast<Eigen::Index>(indices.size()), table.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= table.rows()) {
      throw Error(ErrorCode::kShapeMismatch, "gather_rows index " + std::to_string(indices[i]) +
                                                 " outside table of " +
                                                 std::to_string(table.rows()));
    }
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(indices[i]);
  }
  std::vector<int> saved(indices.begin(), indices.end());
  return t.record(std::move(out), [table, saved](Tape& t, const DenseMatrix& g) {
    t.accumulate_rows(table, saved, g);
  });
}

}  // namespace ops

DenseMatrix softmax_rows(const DenseMatrix& m) {
  DenseMatrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double peak = m.row(r).maxCoeff();
    double total = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out(r, c) = std::exp(m(r, c) - peak);
      total += out(r, c);
    }
    out.row(r) /= total;
  }
  return out;
}

double leaky_relu(double x, double slope) { return x >= 0.0 ? x : slope * x; }

}  // namespace gcal
