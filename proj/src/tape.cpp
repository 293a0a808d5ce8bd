// Copyright 2026 The gmcl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gmcl/tape.hpp"

#include <cmath>
#include <utility>

#include "gmcl/errors.hpp"

namespace gmcl {
namespace {

constexpr double kNormFloor = 1e-12;

}  // namespace

Var Tape::variable(Matrix value, std::string name) {
  if (!value.allFinite()) throw NumericError("non-finite value in " + name);
  nodes_.push_back(Node{std::move(name), std::move(value), Matrix(), nullptr, true});
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Matrix value, std::string name) {
  if (!value.allFinite()) throw NumericError("non-finite value in " + name);
  nodes_.push_back(Node{std::move(name), std::move(value), Matrix(), nullptr, false});
  return Var{nodes_.size() - 1};
}

Var Tape::record(std::string op, const std::vector<Var>& inputs, Matrix value, Pullback pullback) {
  if (!value.allFinite()) throw NumericError("non-finite output of " + op);
  bool needs = false;
  for (Var in : inputs) needs = needs || nodes_[in.id].requires_grad;
  nodes_.push_back(Node{std::move(op), std::move(value), Matrix(),
                        needs ? std::move(pullback) : nullptr, needs});
  return Var{nodes_.size() - 1};
}

double Tape::scalar(Var v) const {
  const Matrix& m = nodes_[v.id].value;
  require(m.rows() == 1 && m.cols() == 1, "node is not a scalar");
  return m(0, 0);
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& node = nodes_[v.id];
  if (!node.requires_grad) return;
  node.grad += g;
}

void Tape::backward(Var loss) {
  require(loss.id < nodes_.size(), "loss node is not on this tape");
  const Matrix& lv = nodes_[loss.id].value;
  require(lv.rows() == 1 && lv.cols() == 1, "backward needs a scalar loss");
  for (Node& n : nodes_) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  if (!nodes_[loss.id].requires_grad) return;
  nodes_[loss.id].grad(0, 0) = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.pullback) continue;
    if (!n.grad.allFinite()) throw NumericError("non-finite gradient flowing into " + n.op);
    // The pullback may append to other nodes' buffers but never resizes
    // nodes_, so copying the gradient out keeps it safe to read.
    const Matrix g = n.grad;
    n.pullback(*this, g);
  }
}

Var matmul(Tape& t, Var a, Var b) {
  Matrix out = t.value(a) * t.value(b);
  return t.record("matmul", {a, b}, std::move(out), [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g * tp.value(b).transpose());
    tp.accumulate(b, tp.value(a).transpose() * g);
  });
}

Var affine(Tape& t, Var x, Var weight, Var bias) {
  const Matrix& xv = t.value(x);
  const Matrix& wv = t.value(weight);
  const Matrix& bv = t.value(bias);
  require(xv.cols() == wv.rows(), "affine: input width does not match weight rows");
  require(bv.rows() == 1 && bv.cols() == wv.cols(), "affine: bias shape mismatch");
  Matrix out = xv * wv;
  out.rowwise() += bv.row(0);
  return t.record("affine", {x, weight, bias}, std::move(out),
                  [x, weight, bias](Tape& tp, const Matrix& g) {
                    tp.accumulate(x, g * tp.value(weight).transpose());
                    tp.accumulate(weight, tp.value(x).transpose() * g);
                    tp.accumulate(bias, g.colwise().sum());
                  });
}

Var add(Tape& t, Var a, Var b) {
  require(t.value(a).rows() == t.value(b).rows() && t.value(a).cols() == t.value(b).cols(),
          "add: shape mismatch");
  Matrix out = t.value(a) + t.value(b);
  return t.record("add", {a, b}, std::move(out), [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var scale(Tape& t, Var a, double s) {
  Matrix out = t.value(a) * s;
  return t.record("scale", {a}, std::move(out),
                  [a, s](Tape& tp, const Matrix& g) { tp.accumulate(a, g * s); });
}

Var add_scalar(Tape& t, Var a, double s) {
  Matrix out = t.value(a).array() + s;
  return t.record("add_scalar", {a}, std::move(out),
                  [a](Tape& tp, const Matrix& g) { tp.accumulate(a, g); });
}

Var relu(Tape& t, Var x) {
  Matrix out = t.value(x).cwiseMax(0.0);
  return t.record("relu", {x}, std::move(out), [x](Tape& tp, const Matrix& g) {
    tp.accumulate(x, (tp.value(x).array() > 0.0).select(g, 0.0));
  });
}

Matrix elu_value(const Matrix& x) {
  return x.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
}

Var elu(Tape& t, Var x) {
  return t.record("elu", {x}, elu_value(t.value(x)), [x](Tape& tp, const Matrix& g) {
    const Matrix d = tp.value(x).unaryExpr([](double v) { return v > 0.0 ? 1.0 : std::exp(v); });
    tp.accumulate(x, g.cwiseProduct(d));
  });
}

Matrix sigmoid_value(const Matrix& x) {
  return x.unaryExpr([](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

Var sigmoid(Tape& t, Var x) {
  Matrix y = sigmoid_value(t.value(x));
  return t.record("sigmoid", {x}, y, [x, y](Tape& tp, const Matrix& g) {
    tp.accumulate(x, g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Matrix softmax_rows_value(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    RowVector e = (x.row(r).array() - m).exp().matrix();
    out.row(r) = e / e.sum();
  }
  return out;
}

Var softmax_rows(Tape& t, Var x) {
  Matrix y = softmax_rows_value(t.value(x));
  Matrix y_copy = y;
  return t.record("softmax", {x}, std::move(y), [x, y_copy](Tape& tp, const Matrix& g) {
    Matrix dx(y_copy.rows(), y_copy.cols());
    for (Eigen::Index r = 0; r < y_copy.rows(); ++r) {
      const double dot = g.row(r).dot(y_copy.row(r));
      dx.row(r) = y_copy.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
    }
    tp.accumulate(x, dx);
  });
}

Matrix l2_normalize_rows_value(const Matrix& x) {
  Matrix out = x;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double norm = x.row(r).norm();
    if (norm < kNormFloor) throw NumericError("l2_normalize: row norm below 1e-12");
    out.row(r) /= norm;
  }
  return out;
}

Var l2_normalize_rows(Tape& t, Var x) {
  Matrix y = l2_normalize_rows_value(t.value(x));
  return t.record("l2_normalize", {x}, y, [x, y](Tape& tp, const Matrix& g) {
    const Matrix& xv = tp.value(x);
    Matrix dx(y.rows(), y.cols());
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const double norm = xv.row(r).norm();
      const double dot = g.row(r).dot(y.row(r));
      dx.row(r) = (g.row(r) - dot * y.row(r)) / norm;
    }
    tp.accumulate(x, dx);
  });
}

Var slice_cols(Tape& t, Var x, Eigen::Index start, Eigen::Index count) {
  const Matrix& xv = t.value(x);
  require(start >= 0 && count >= 0 && start + count <= xv.cols(), "slice_cols: out of range");
  Matrix out = xv.middleCols(start, count);
  const Eigen::Index rows = xv.rows();
  const Eigen::Index cols = xv.cols();
  return t.record("slice_cols", {x}, std::move(out),
                  [x, start, count, rows, cols](Tape& tp, const Matrix& g) {
                    Matrix dx = Matrix::Zero(rows, cols);
                    dx.middleCols(start, count) = g;
                    tp.accumulate(x, dx);
                  });
}

Var sum(Tape& t, Var x) {
  Matrix out(1, 1);
  out(0, 0) = t.value(x).sum();
  return t.record("sum", {x}, std::move(out), [x](Tape& tp, const Matrix& g) {
    const Matrix& xv = tp.value(x);
    tp.accumulate(x, Matrix::Constant(xv.rows(), xv.cols(), g(0, 0)));
  });
}

Var sum_squares(Tape& t, Var x) {
  Matrix out(1, 1);
  out(0, 0) = t.value(x).squaredNorm();
  return t.record("sum_squares", {x}, std::move(out), [x](Tape& tp, const Matrix& g) {
    tp.accumulate(x, 2.0 * g(0, 0) * tp.value(x));
  });
}

}  // namespace gmcl
