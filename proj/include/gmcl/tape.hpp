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

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gmcl {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// Handle to a node recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

// Reverse-mode tape over dense matrices. Every node stores its forward value;
// backward() walks the nodes in reverse insertion order and hands each
// node's output gradient to its recorded pullback.
class Tape {
 public:
  // Pullback: receives the tape and the gradient of the loss w.r.t. the node
  // output; adds contributions into input gradients via accumulate().
  using Pullback = std::function<void(Tape&, const Matrix&)>;

  Var variable(Matrix value, std::string name = "variable");
  Var constant(Matrix value, std::string name = "constant");

  // Records a derived node. Throws NumericError naming `op` when the value is
  // not finite.
  Var record(std::string op, const std::vector<Var>& inputs, Matrix value, Pullback pullback);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  // Gradient of the last backward() loss w.r.t. v; zeros if v did not
  // influence it.
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  void accumulate(Var v, const Matrix& g);

  // Requires a 1x1 loss. Resets all gradient buffers to zero first.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::string op;
    Matrix value;
    Matrix grad;
    Pullback pullback;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

// Elementary differentiable operations.
Var matmul(Tape& t, Var a, Var b);
Var affine(Tape& t, Var x, Var weight, Var bias);  // x W + 1 b, bias is 1 x out
Var add(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double s);
Var add_scalar(Tape& t, Var a, double s);
Var relu(Tape& t, Var x);
Var elu(Tape& t, Var x);
Var sigmoid(Tape& t, Var x);
Var softmax_rows(Tape& t, Var x);
// Divides each row by its Euclidean norm. Rows with norm below 1e-12 raise
// NumericError instead of being amplified.
Var l2_normalize_rows(Tape& t, Var x);
Var slice_cols(Tape& t, Var x, Eigen::Index start, Eigen::Index count);
Var sum(Tape& t, Var x);
Var sum_squares(Tape& t, Var x);

// Value-only helpers sharing definitions with the tape ops.
Matrix elu_value(const Matrix& x);
Matrix sigmoid_value(const Matrix& x);
Matrix softmax_rows_value(const Matrix& x);
Matrix l2_normalize_rows_value(const Matrix& x);

}  // namespace gmcl
