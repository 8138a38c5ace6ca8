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

#include "mdbt/autodiff.h"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mdbt::ad {
namespace {

void CheckSameTape(Var a, Var b) {
  if (a.tape() != b.tape()) throw std::logic_error("autodiff: vars from different tapes");
}

void CheckShape(bool ok, const char *op) {
  if (!ok) throw std::invalid_argument(std::string("autodiff: shape mismatch in ") + op);
}

double SigmoidScalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix SigmoidOf(const Matrix &m) { return m.unaryExpr([](double x) { return SigmoidScalar(x); }); }

}  // namespace

const Matrix &Var::value() const { return tape_->value(id_); }

const Matrix &Tape::value(int id) const {
  const Node &n = nodes_[id];
  return n.ref ? *n.ref : n.value;
}

Matrix &Tape::grad(int id) {
  Node &n = nodes_[id];
  if (n.grad.size() == 0) {
    const Matrix &v = value(id);
    n.grad = Matrix::Zero(v.rows(), v.cols());
  }
  return n.grad;
}

Var Tape::Constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Leaf(const Matrix *value, Matrix *grad_sink) {
  Node n;
  n.ref = value;
  n.sink = record_ ? grad_sink : nullptr;
  n.needs_grad = record_ && grad_sink != nullptr;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Push(Matrix value, std::initializer_list<Var> inputs, Backprop backprop) {
  bool needs = false;
  if (record_) {
    for (const Var &v : inputs) {
      if (v.tape() != this) throw std::logic_error("autodiff: input from another tape");
      needs = needs || nodes_[v.id()].needs_grad;
    }
  }
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs;
  if (needs) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Push(Matrix value, const std::vector<Var> &inputs, Backprop backprop) {
  bool needs = false;
  if (record_) {
    for (const Var &v : inputs) {
      if (v.tape() != this) throw std::logic_error("autodiff: input from another tape");
      needs = needs || nodes_[v.id()].needs_grad;
    }
  }
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs;
  if (needs) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::Backward(Var root) {
  if (!record_) throw std::logic_error("autodiff: Backward on a non-recording tape");
  if (root.tape() != this) throw std::logic_error("autodiff: root from another tape");
  if (root.rows() != 1 || root.cols() != 1) throw std::logic_error("autodiff: root must be 1x1");
  for (auto &n : nodes_) n.grad.resize(0, 0);
  grad(root.id())(0, 0) = 1.0;
  for (int id = root.id(); id >= 0; --id) {
    Node &n = nodes_[id];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.backprop) n.backprop(*this, id);
  }
  for (auto &n : nodes_) {
    if (n.sink && n.grad.size() > 0) *n.sink += n.grad;
  }
}

Var Add(Var a, Var b) {
  CheckSameTape(a, b);
  CheckShape(a.rows() == b.rows() && a.cols() == b.cols(), "Add");
  int ia = a.id(), ib = b.id();
  return a.tape()->Push(a.value() + b.value(), {a, b}, [ia, ib](Tape &t, int self) {
    const Matrix &g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia) += g;
    if (t.needs_grad(ib)) t.grad(ib) += g;
  });
}

Var Sum(const std::vector<Var> &terms) {
  if (terms.empty()) throw std::invalid_argument("autodiff: Sum of nothing");
  Matrix total = terms[0].value();
  std::vector<int> ids{terms[0].id()};
  for (size_t i = 1; i < terms.size(); ++i) {
    CheckSameTape(terms[0], terms[i]);
    CheckShape(terms[i].rows() == total.rows() && terms[i].cols() == total.cols(), "Sum");
    total += terms[i].value();
    ids.push_back(terms[i].id());
  }
  return terms[0].tape()->Push(std::move(total), terms, [ids](Tape &t, int self) {
    const Matrix &g = t.grad(self);
    for (int id : ids) {
      if (t.needs_grad(id)) t.grad(id) += g;
    }
  });
}

Var AddScalar(Var m, Var s) {
  CheckSameTape(m, s);
  CheckShape(s.rows() == 1 && s.cols() == 1, "AddScalar");
  int im = m.id(), is = s.id();
  Matrix out = m.value().array() + s.scalar();
  return m.tape()->Push(std::move(out), {m, s}, [im, is](Tape &t, int self) {
    const Matrix &g = t.grad(self);
    if (t.needs_grad(im)) t.grad(im) += g;
    if (t.needs_grad(is)) t.grad(is)(0, 0) += g.sum();
  });
}

Var AddColumn(Var m, Var col) {
  CheckSameTape(m, col);
  CheckShape(col.cols() == 1 && col.rows() == m.rows(), "AddColumn");
  int im = m.id(), ic = col.id();
  Matrix out = m.value().colwise() + col.value().col(0);
  return m.tape()->Push(std::move(out), {m, col}, [im, ic](Tape &t, int self) {
    const Matrix &g = t.grad(self);
    if (t.needs_grad(im)) t.grad(im) += g;
    if (t.needs_grad(ic)) t.grad(ic) += g.rowwise().sum();
  });
}

Var Mul(Var a, Var b) {
  CheckSameTape(a, b);
  CheckShape(a.rows() == b.rows() && a.cols() == b.cols(), "Mul");
  int ia = a.id(), ib = b.id();
  Matrix out = a.value().cwiseProduct(b.value());
  return a.tape()->Push(std::move(out), {a, b}, [ia, ib](Tape &t, int self) {
    const Matrix &g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia) += g.cwiseProduct(t.value(ib));
    if (t.needs_grad(ib)) t.grad(ib) += g.cwiseProduct(t.value(ia));
  });
}

Var MulConst(Var a, const Matrix &c) {
  CheckShape(a.rows() == c.rows() && a.cols() == c.cols(), "MulConst");
  int ia = a.id();
  return a.tape()->Push(a.value().cwiseProduct(c), {a}, [ia, c](Tape &t, int self) {
    t.grad(ia) += t.grad(self).cwiseProduct(c);
  });
}

Var Scale(Var s, Var m) {
  CheckSameTape(s, m);
  CheckShape(s.rows() == 1 && s.cols() == 1, "Scale");
  int is = s.id(), im = m.id();
  return m.tape()->Push(s.scalar() * m.value(), {s, m}, [is, im](Tape &t, int self) {
    const Matrix &g = t.grad(self);
    if (t.needs_grad(is)) t.grad(is)(0, 0) += g.cwiseProduct(t.value(im)).sum();
    if (t.needs_grad(im)) t.grad(im) += t.value(is)(0, 0) * g;
  });
}

Var ScaleRows(Var m, Var h) {
  CheckSameTape(m, h);
  CheckShape(h.cols() == 1 && h.rows() == m.rows(), "ScaleRows");
  int im = m.id(), ih = h.id();
  Matrix out = h.value().col(0).asDiagonal() * m.value();
  return m.tape()->Push(std::move(out), {m, h}, [im, ih](Tape &t, int self) {
    const Matrix &g = t.grad(self);
    if (t.needs_grad(im)) t.grad(im) += t.value(ih).col(0).asDiagonal() * g;
    if (t.needs_grad(ih)) t.grad(ih) += g.cwiseProduct(t.value(im)).rowwise().sum();
  });
}

Var MatMul(Var a, Var b) {
  CheckSameTape(a, b);
  CheckShape(a.cols() == b.rows(), "MatMul");
  int ia = a.id(), ib = b.id();
  Matrix out = a.value() * b.value();
  return a.tape()->Push(std::move(out), {a, b}, [ia, ib](Tape &t, int self) {
    const Matrix &g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia).noalias() += g * t.value(ib).transpose();
    if (t.needs_grad(ib)) t.grad(ib).noalias() += t.value(ia).transpose() * g;
  });
}

Var RowDot(Var w, Var m) {
  CheckSameTape(w, m);
  CheckShape(w.cols() == 1 && w.rows() == m.rows(), "RowDot");
  int iw = w.id(), im = m.id();
  Matrix out = w.value().transpose() * m.value();
  return m.tape()->Push(std::move(out), {w, m}, [iw, im](Tape &t, int self) {
    const Matrix &g = t.grad(self);  // 1 x cols
    if (t.needs_grad(iw)) t.grad(iw).noalias() += t.value(im) * g.transpose();
    if (t.needs_grad(im)) t.grad(im).noalias() += t.value(iw) * g;
  });
}

Var Tanh(Var a) {
  int ia = a.id();
  Matrix out = a.value().array().tanh().matrix();
  return a.tape()->Push(std::move(out), {a}, [ia](Tape &t, int self) {
    const Matrix &y = t.value(self);
    t.grad(ia) += t.grad(self).cwiseProduct((1.0 - y.array().square()).matrix());
  });
}

Var Sigmoid(Var a) {
  int ia = a.id();
  return a.tape()->Push(SigmoidOf(a.value()), {a}, [ia](Tape &t, int self) {
    const Matrix &y = t.value(self);
    t.grad(ia) += t.grad(self).cwiseProduct((y.array() * (1.0 - y.array())).matrix());
  });
}

Var SliceRows(Var a, Eigen::Index start, Eigen::Index count) {
  CheckShape(start >= 0 && count >= 0 && start + count <= a.rows(), "SliceRows");
  int ia = a.id();
  Matrix out = a.value().middleRows(start, count);
  return a.tape()->Push(std::move(out), {a}, [ia, start, count](Tape &t, int self) {
    t.grad(ia).middleRows(start, count) += t.grad(self);
  });
}

Var ConcatRows(const std::vector<Var> &parts) {
  if (parts.empty()) throw std::invalid_argument("autodiff: ConcatRows of nothing");
  Eigen::Index rows = 0, cols = parts[0].cols();
  for (const Var &p : parts) {
    CheckSameTape(parts[0], p);
    CheckShape(p.cols() == cols, "ConcatRows");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> layout;
  Eigen::Index at = 0;
  for (const Var &p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    layout.emplace_back(p.id(), at);
    at += p.rows();
  }
  return parts[0].tape()->Push(std::move(out), parts, [layout](Tape &t, int self) {
    const Matrix &g = t.grad(self);
    for (auto [id, offset] : layout) {
      if (t.needs_grad(id)) t.grad(id) += g.middleRows(offset, t.value(id).rows());
    }
  });
}

Var GatherCols(Var m, const std::vector<int> &index) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(index.size()));
  for (size_t j = 0; j < index.size(); ++j) {
    CheckShape(index[j] >= 0 && index[j] < m.cols(), "GatherCols");
    out.col(static_cast<Eigen::Index>(j)) = m.value().col(index[j]);
  }
  int im = m.id();
  return m.tape()->Push(std::move(out), {m}, [im, index](Tape &t, int self) {
    const Matrix &g = t.grad(self);
    Matrix &gm = t.grad(im);
    for (size_t j = 0; j < index.size(); ++j) gm.col(index[j]) += g.col(static_cast<Eigen::Index>(j));
  });
}

Var ConstrainedApply(Var gamma, Var lambda, Var x, const Segments &segments) {
  CheckSameTape(gamma, x);
  CheckSameTape(lambda, x);
  CheckShape(x.rows() == 1 && !segments.empty() && segments.back() == x.cols(), "ConstrainedApply");
  const double g = gamma.scalar(), l = lambda.scalar();
  const Matrix &xv = x.value();
  Matrix out(1, xv.cols());
  for (size_t k = 0; k + 1 < segments.size(); ++k) {
    int b = segments[k], n = segments[k + 1] - b;
    double total = xv.middleCols(b, n).sum();
    out.middleCols(b, n) = (g * xv.middleCols(b, n)).array() + l * (total - xv.middleCols(b, n).array());
  }
  int ig = gamma.id(), il = lambda.id(), ix = x.id();
  return x.tape()->Push(std::move(out), {gamma, lambda, x},
                        [ig, il, ix, segments](Tape &t, int self) {
    const Matrix &go = t.grad(self);
    const Matrix &xv = t.value(ix);
    const double g = t.value(ig)(0, 0), l = t.value(il)(0, 0);
    double dg = 0, dl = 0;
    Matrix dx(1, xv.cols());
    for (size_t k = 0; k + 1 < segments.size(); ++k) {
      int b = segments[k], n = segments[k + 1] - b;
      auto xs = xv.middleCols(b, n).array();
      auto gs = go.middleCols(b, n).array();
      double xsum = xs.sum(), gsum = gs.sum();
      dg += (gs * xs).sum();
      dl += (gs * (xsum - xs)).sum();
      dx.middleCols(b, n) = (g * gs + l * (gsum - gs)).matrix();
    }
    if (t.needs_grad(ig)) t.grad(ig)(0, 0) += dg;
    if (t.needs_grad(il)) t.grad(il)(0, 0) += dl;
    if (t.needs_grad(ix)) t.grad(ix) += dx;
  });
}

Var SegmentSoftmax(Var x, const Segments &segments) {
  CheckShape(x.rows() == 1 && !segments.empty() && segments.back() == x.cols(), "SegmentSoftmax");
  const Matrix &xv = x.value();
  Matrix out(1, xv.cols());
  for (size_t k = 0; k + 1 < segments.size(); ++k) {
    int b = segments[k], n = segments[k + 1] - b;
    double m = xv.middleCols(b, n).maxCoeff();
    out.middleCols(b, n) = (xv.middleCols(b, n).array() - m).exp().matrix();
    out.middleCols(b, n) /= out.middleCols(b, n).sum();
  }
  int ix = x.id();
  return x.tape()->Push(std::move(out), {x}, [ix, segments](Tape &t, int self) {
    const Matrix &p = t.value(self);
    const Matrix &g = t.grad(self);
    Matrix &gx = t.grad(ix);
    for (size_t k = 0; k + 1 < segments.size(); ++k) {
      int b = segments[k], n = segments[k + 1] - b;
      double dot = g.middleCols(b, n).cwiseProduct(p.middleCols(b, n)).sum();
      gx.middleCols(b, n).array() += p.middleCols(b, n).array() * (g.middleCols(b, n).array() - dot);
    }
  });
}

Var BinaryCrossEntropy(Var p, const Matrix &targets, double eps, bool with_negatives) {
  CheckShape(p.rows() == targets.rows() && p.cols() == targets.cols(), "BinaryCrossEntropy");
  const Matrix &pv = p.value();
  double loss = 0;
  for (Eigen::Index i = 0; i < pv.size(); ++i) {
    double ti = targets(i), pi = pv(i);
    if (ti != 0) loss -= ti * std::log(std::max(pi, eps));
    if (with_negatives && ti != 1) loss -= (1 - ti) * std::log(std::max(1 - pi, eps));
  }
  int ip = p.id();
  return p.tape()->Push(Matrix::Constant(1, 1, loss), {p},
                        [ip, targets, eps, with_negatives](Tape &t, int self) {
    const double g = t.grad(self)(0, 0);
    const Matrix &pv = t.value(ip);
    Matrix &gp = t.grad(ip);
    for (Eigen::Index i = 0; i < pv.size(); ++i) {
      double ti = targets(i), pi = pv(i);
      if (ti != 0 && pi > eps) gp(i) -= g * ti / pi;
      if (with_negatives && ti != 1 && 1 - pi > eps) gp(i) += g * (1 - ti) / (1 - pi);
    }
  });
}

Var SegmentNll(Var p, const Segments &segments, const std::vector<int> &labels, double eps) {
  CheckShape(p.rows() == 1 && segments.size() == labels.size() + 1 && segments.back() == p.cols(),
             "SegmentNll");
  const Matrix &pv = p.value();
  double loss = 0;
  for (size_t k = 0; k < labels.size(); ++k) {
    CheckShape(labels[k] >= 0 && labels[k] < segments[k + 1] - segments[k], "SegmentNll label");
    loss -= std::log(std::max(pv(0, segments[k] + labels[k]), eps));
  }
  int ip = p.id();
  return p.tape()->Push(Matrix::Constant(1, 1, loss), {p},
                        [ip, segments, labels, eps](Tape &t, int self) {
    const double g = t.grad(self)(0, 0);
    const Matrix &pv = t.value(ip);
    Matrix &gp = t.grad(ip);
    for (size_t k = 0; k < labels.size(); ++k) {
      int col = segments[k] + labels[k];
      if (pv(0, col) > eps) gp(0, col) -= g / pv(0, col);
    }
  });
}

Var LstmFinalState(const Matrix &inputs, Var w, Var u, Var b, bool reverse) {
  CheckSameTape(w, u);
  CheckSameTape(w, b);
  const Eigen::Index H = u.cols();
  const Eigen::Index T = inputs.cols();
  CheckShape(T >= 1 && w.rows() == 4 * H && u.rows() == 4 * H && b.rows() == 4 * H &&
                 b.cols() == 1 && w.cols() == inputs.rows(),
             "LstmFinalState");
  const Matrix &W = w.value();
  const Matrix &U = u.value();
  const Eigen::VectorXd bias = b.value().col(0);

  // Step s consumes column order[s]; states are stored per step.
  std::vector<Eigen::Index> order(static_cast<size_t>(T));
  for (Eigen::Index s = 0; s < T; ++s) order[s] = reverse ? T - 1 - s : s;
  Matrix gates(4 * H, T), cells(H, T), hidden(H, T);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(H), c = Eigen::VectorXd::Zero(H);
  for (Eigen::Index s = 0; s < T; ++s) {
    Eigen::VectorXd a = W * inputs.col(order[s]) + U * h + bias;
    Eigen::VectorXd ig = SigmoidOf(a.segment(0, H));
    Eigen::VectorXd fg = SigmoidOf(a.segment(H, H));
    Eigen::VectorXd cg = a.segment(2 * H, H).array().tanh().matrix();
    Eigen::VectorXd og = SigmoidOf(a.segment(3 * H, H));
    c = fg.cwiseProduct(c) + ig.cwiseProduct(cg);
    h = og.cwiseProduct(c.array().tanh().matrix());
    gates.col(s) << ig, fg, cg, og;
    cells.col(s) = c;
    hidden.col(s) = h;
  }

  int iw = w.id(), iu = u.id(), ib = b.id();
  return w.tape()->Push(Matrix(h), {w, u, b},
                        [iw, iu, ib, inputs, order, gates, cells, hidden, H, T](Tape &t, int self) {
    const Matrix &U = t.value(iu);
    Matrix dW = Matrix::Zero(4 * H, inputs.rows());
    Matrix dU = Matrix::Zero(4 * H, H);
    Eigen::VectorXd db = Eigen::VectorXd::Zero(4 * H);
    Eigen::VectorXd dh = t.grad(self).col(0);
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(H);
    Eigen::VectorXd da(4 * H);
    for (Eigen::Index s = T - 1; s >= 0; --s) {
      auto ig = gates.col(s).segment(0, H).array();
      auto fg = gates.col(s).segment(H, H).array();
      auto cg = gates.col(s).segment(2 * H, H).array();
      auto og = gates.col(s).segment(3 * H, H).array();
      Eigen::ArrayXd tc = cells.col(s).array().tanh();
      Eigen::ArrayXd c_prev = Eigen::ArrayXd::Zero(H);
      if (s > 0) c_prev = cells.col(s - 1).array();
      dc.array() += dh.array() * og * (1 - tc.square());
      da.segment(0, H) = (dc.array() * cg * ig * (1 - ig)).matrix();
      da.segment(H, H) = (dc.array() * c_prev * fg * (1 - fg)).matrix();
      da.segment(2 * H, H) = (dc.array() * ig * (1 - cg.square())).matrix();
      da.segment(3 * H, H) = (dh.array() * tc * og * (1 - og)).matrix();
      dW.noalias() += da * inputs.col(order[s]).transpose();
      if (s > 0) dU.noalias() += da * hidden.col(s - 1).transpose();
      db += da;
      dh = U.transpose() * da;
      dc = (dc.array() * fg).matrix();
    }
    if (t.needs_grad(iw)) t.grad(iw) += dW;
    if (t.needs_grad(iu)) t.grad(iu) += dU;
    if (t.needs_grad(ib)) t.grad(ib) += db;
  });
}

Var ConvReluMaxPool(const Matrix &inputs, Var w, Var b, int width) {
  CheckSameTape(w, b);
  const Eigen::Index D = inputs.rows(), T = inputs.cols();
  CheckShape(T >= 1 && width >= 1 && w.cols() == width * D && b.rows() == w.rows() && b.cols() == 1,
             "ConvReluMaxPool");
  const Eigen::Index positions = std::max<Eigen::Index>(T, width) - width + 1;
  // Column p stacks input columns p..p+width-1 (zero beyond T).
  Matrix windows = Matrix::Zero(width * D, positions);
  for (Eigen::Index p = 0; p < positions; ++p) {
    for (int k = 0; k < width; ++k) {
      if (p + k < T) windows.block(k * D, p, D, 1) = inputs.col(p + k);
    }
  }
  Matrix z = w.value() * windows;
  z.colwise() += b.value().col(0);
  const Eigen::Index F = z.rows();
  Matrix out(F, 1);
  std::vector<Eigen::Index> argmax(static_cast<size_t>(F));
  for (Eigen::Index f = 0; f < F; ++f) {
    Eigen::Index best = 0;
    double m = z.row(f).maxCoeff(&best);
    argmax[f] = best;
    out(f, 0) = std::max(m, 0.0);
  }
  int iw = w.id(), ib = b.id();
  return w.tape()->Push(std::move(out), {w, b}, [iw, ib, windows, argmax](Tape &t, int self) {
    const Matrix &g = t.grad(self);
    const Matrix &y = t.value(self);
    bool gw = t.needs_grad(iw), gb = t.needs_grad(ib);
    for (Eigen::Index f = 0; f < g.rows(); ++f) {
      if (y(f, 0) <= 0 || g(f, 0) == 0) continue;
      if (gw) t.grad(iw).row(f) += g(f, 0) * windows.col(argmax[f]).transpose();
      if (gb) t.grad(ib)(f, 0) += g(f, 0);
    }
  });
}

}  // namespace mdbt::ad
