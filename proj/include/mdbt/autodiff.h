// Copyright 2026 The MDBT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MDBT_AUTODIFF_H_
#define MDBT_AUTODIFF_H_

#include <functional>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

namespace mdbt::ad {

using Matrix = Eigen::MatrixXd;

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix &value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  Tape *tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape *tape, int id) : tape_(tape), id_(id) {}

  Tape *tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape. Nodes are appended in evaluation order, so Backward is a
// single reverse sweep. A tape built with record=false evaluates values only.
class Tape {
 public:
  // Propagates the gradient of the node at `self` into its inputs via
  // Tape::grad(input_id).
  using Backprop = std::function<void(Tape &tape, int self)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  bool recording() const { return record_; }

  Var Constant(Matrix value);

  // A trainable leaf that reads `*value` in place. Backward adds the leaf's
  // gradient into `*grad_sink` (which must have the same shape).
  Var Leaf(const Matrix *value, Matrix *grad_sink);

  // Appends an op node. `inputs` decide whether the node needs a gradient.
  Var Push(Matrix value, std::initializer_list<Var> inputs, Backprop backprop);
  Var Push(Matrix value, const std::vector<Var> &inputs, Backprop backprop);

  // Seeds d(root)/d(root) = 1 for a 1x1 root and sweeps backwards, then
  // flushes leaf gradients into their sinks. Clears previous gradients first.
  void Backward(Var root);

  const Matrix &value(int id) const;
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  // Gradient accumulator for a node, zero-initialised on first access.
  Matrix &grad(int id);
  bool has_grad(int id) const { return nodes_[id].grad.size() > 0; }

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix *ref = nullptr;  // leaf reading a parameter in place
    Matrix *sink = nullptr;
    Matrix grad;
    Backprop backprop;
    bool needs_grad = false;
  };

  bool record_;
  std::vector<Node> nodes_;
};

// Elementwise and broadcasting arithmetic.
Var Add(Var a, Var b);
Var Sum(const std::vector<Var> &terms);
Var AddScalar(Var m, Var s);     // s is 1x1
Var AddColumn(Var m, Var col);   // col is rows x 1, added to every column
Var Mul(Var a, Var b);           // elementwise
Var MulConst(Var a, const Matrix &c);
Var Scale(Var s, Var m);         // s is 1x1
Var ScaleRows(Var m, Var h);     // out(i,j) = h(i) * m(i,j)
Var MatMul(Var a, Var b);
Var RowDot(Var w, Var m);        // w^T m, w is rows x 1 -> 1 x cols
Var Tanh(Var a);
Var Sigmoid(Var a);

// Structural ops.
Var SliceRows(Var a, Eigen::Index start, Eigen::Index count);
Var ConcatRows(const std::vector<Var> &parts);
Var GatherCols(Var m, const std::vector<int> &index);

// Segments partition the columns of a 1 x C row: segment k is
// [offsets[k], offsets[k+1]).
using Segments = std::vector<int>;

// gamma * x + lambda * (segment_sum(x) - x), per segment; gamma, lambda 1x1.
// Equals multiplying each segment by gamma*I + lambda*(1 - I).
Var ConstrainedApply(Var gamma, Var lambda, Var x, const Segments &segments);
Var SegmentSoftmax(Var x, const Segments &segments);

// Losses; each returns 1x1.
// -sum t log max(p, eps) [- sum (1-t) log max(1-p, eps) when with_negatives].
Var BinaryCrossEntropy(Var p, const Matrix &targets, double eps, bool with_negatives);
// -sum_k log max(p[offsets[k] + label[k]], eps).
Var SegmentNll(Var p, const Segments &segments, const std::vector<int> &labels, double eps);

// Fused encoder ops over a constant D x T input.
// Final hidden state (H x 1) of an LSTM run left-to-right, or right-to-left
// when `reverse`. Gate blocks in W, U, b are ordered input, forget, cell,
// output. T must be >= 1.
Var LstmFinalState(const Matrix &inputs, Var w, Var u, Var b, bool reverse);
// max over time of relu(W * window + b), windows of `width` columns; inputs
// shorter than width are zero-padded on the right. T must be >= 1.
Var ConvReluMaxPool(const Matrix &inputs, Var w, Var b, int width);

}  // namespace mdbt::ad

#endif  // MDBT_AUTODIFF_H_
