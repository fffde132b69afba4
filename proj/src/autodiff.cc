// Copyright 2026 The wordpros Authors
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

#include "wordpros/autodiff.h"

#include <cmath>

namespace wordpros::ad {

Matrix& Gradients::at(const Parameter* p) {
  auto it = grads_.find(p);
  if (it == grads_.end()) {
    it = grads_.emplace(p, Matrix::Zero(p->value.rows(), p->value.cols())).first;
  }
  return it->second;
}

const Matrix* Gradients::find(const Parameter* p) const {
  auto it = grads_.find(p);
  return it == grads_.end() ? nullptr : &it->second;
}

void Gradients::add(const Gradients& other) {
  for (const auto& [p, g] : other.grads_) at(p) += g;
}

void Gradients::scale(double s) {
  for (auto& [p, g] : grads_) g *= s;
}

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(Parameter& p) {
  nodes_.push_back(Node{p.value, {}, {}, &p, true});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::push(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  return push(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
              std::move(backward));
}

Var Tape::push(Matrix value, std::span<const Var> inputs, Backward backward) {
  bool needs = false;
  for (const Var& v : inputs) needs = needs || nodes_[v.id()].needs_grad;
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : Backward{},
                        nullptr, needs});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int id, const Matrix& g) { accumulate_expr(id, g); }

Matrix& Tape::grad_buffer(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var root, Gradients& out) {
  if (root.rows() != 1 || root.cols() != 1) {
    throw ShapeError("backward: root must be 1x1, got " + shape_str(root.value()));
  }
  if (!nodes_[root.id()].needs_grad) return;
  nodes_[root.id()].grad = Matrix::Ones(1, 1);
  for (int i = root.id(); i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.param != nullptr) {
      out.at(n.param) += n.grad;
    } else if (n.backward) {
      const Matrix g = std::move(n.grad);
      n.backward(*this, g);
    }
  }
}

namespace {

void check_same(const Var& a, const Var& b, const char* what) {
  require_same_shape(a.value(), b.value(), what);
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_str(a.value()) + " * " + shape_str(b.value()));
  }
  Matrix v = a.value() * b.value();
  int ia = a.id(), ib = b.id();
  return a.tape()->push(std::move(v), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    if (t.needs_grad(ia)) t.accumulate_expr(ia, g * t.value(ib).transpose());
    if (t.needs_grad(ib)) t.accumulate_expr(ib, t.value(ia).transpose() * g);
  });
}

Var add(Var a, Var b) {
  check_same(a, b, "add");
  int ia = a.id(), ib = b.id();
  return a.tape()->push(a.value() + b.value(), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    t.accumulate(ib, g);
  });
}

Var sub(Var a, Var b) {
  check_same(a, b, "sub");
  int ia = a.id(), ib = b.id();
  return a.tape()->push(a.value() - b.value(), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    t.accumulate_expr(ib, -g);
  });
}

Var mul(Var a, Var b) {
  check_same(a, b, "mul");
  int ia = a.id(), ib = b.id();
  return a.tape()->push(a.value().cwiseProduct(b.value()), {a, b},
                        [ia, ib](Tape& t, const Matrix& g) {
                          t.accumulate_expr(ia, g.cwiseProduct(t.value(ib)));
                          t.accumulate_expr(ib, g.cwiseProduct(t.value(ia)));
                        });
}

Var scale(Var a, double s) {
  int ia = a.id();
  return a.tape()->push(a.value() * s, {a},
                        [ia, s](Tape& t, const Matrix& g) { t.accumulate_expr(ia, g * s); });
}

Var add_bias(Var a, Var bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    throw ShapeError("add_bias: " + shape_str(a.value()) + " + " + shape_str(bias.value()));
  }
  Matrix v = a.value().rowwise() + bias.value().row(0);
  int ia = a.id(), ib = bias.id();
  return a.tape()->push(std::move(v), {a, bias}, [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    t.accumulate_expr(ib, g.colwise().sum());
  });
}

Var tanh(Var a) {
  Matrix v = a.value().array().tanh().matrix();
  int ia = a.id();
  int self = static_cast<int>(a.tape()->size());
  return a.tape()->push(std::move(v), {a}, [ia, self](Tape& t, const Matrix& g) {
    const Matrix& y = t.value(self);
    t.accumulate_expr(ia, (g.array() * (1.0 - y.array().square())).matrix());
  });
}

Var sigmoid(Var a) {
  Matrix v = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  int ia = a.id();
  int self = static_cast<int>(a.tape()->size());
  return a.tape()->push(std::move(v), {a}, [ia, self](Tape& t, const Matrix& g) {
    const Matrix& y = t.value(self);
    t.accumulate_expr(ia, (g.array() * y.array() * (1.0 - y.array())).matrix());
  });
}

Var exp(Var a) {
  Matrix v = a.value().array().exp().matrix();
  int ia = a.id();
  int self = static_cast<int>(a.tape()->size());
  return a.tape()->push(std::move(v), {a}, [ia, self](Tape& t, const Matrix& g) {
    t.accumulate_expr(ia, g.cwiseProduct(t.value(self)));
  });
}

Var softplus(Var a) {
  const Matrix& x = a.value();
  Matrix v = x.unaryExpr([](double z) {
    return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  });
  int ia = a.id();
  return a.tape()->push(std::move(v), {a}, [ia](Tape& t, const Matrix& g) {
    Matrix s = t.value(ia).unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
    t.accumulate_expr(ia, g.cwiseProduct(s));
  });
}

Var square(Var a) {
  int ia = a.id();
  return a.tape()->push(a.value().array().square().matrix(), {a},
                        [ia](Tape& t, const Matrix& g) {
                          t.accumulate_expr(ia, 2.0 * g.cwiseProduct(t.value(ia)));
                        });
}

Var sum(Var a) {
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  int ia = a.id();
  Index r = a.rows(), c = a.cols();
  return a.tape()->push(std::move(v), {a}, [ia, r, c](Tape& t, const Matrix& g) {
    t.accumulate_expr(ia, Matrix::Constant(r, c, g(0, 0)));
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw ShapeError("mean of empty matrix");
  return scale(sum(a), 1.0 / n);
}

Var row_sum(Var a) {
  Matrix v = a.value().rowwise().sum();
  int ia = a.id();
  Index c = a.cols();
  return a.tape()->push(std::move(v), {a}, [ia, c](Tape& t, const Matrix& g) {
    t.accumulate_expr(ia, g.col(0).replicate(1, c));
  });
}

Var weighted_sum(Var a, const Matrix& w) {
  require_same_shape(a.value(), w, "weighted_sum");
  Matrix v(1, 1);
  v(0, 0) = a.value().cwiseProduct(w).sum();
  int ia = a.id();
  return a.tape()->push(std::move(v), {a},
                        [ia, w](Tape& t, const Matrix& g) { t.accumulate_expr(ia, w * g(0, 0)); });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const Index r = parts[0].rows();
  Index c = 0;
  for (const Var& p : parts) {
    if (p.rows() != r) throw ShapeError("concat_cols: row count mismatch");
    c += p.cols();
  }
  Matrix v(r, c);
  std::vector<std::pair<int, Index>> layout;
  Index off = 0;
  for (const Var& p : parts) {
    v.middleCols(off, p.cols()) = p.value();
    layout.emplace_back(p.id(), off);
    off += p.cols();
  }
  return parts[0].tape()->push(std::move(v), parts, [layout](Tape& t, const Matrix& g) {
    for (const auto& [id, o] : layout) {
      if (t.needs_grad(id)) t.accumulate_expr(id, g.middleCols(o, t.value(id).cols()));
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const Index c = parts[0].cols();
  Index r = 0;
  for (const Var& p : parts) {
    if (p.cols() != c) throw ShapeError("concat_rows: column count mismatch");
    r += p.rows();
  }
  Matrix v(r, c);
  std::vector<std::pair<int, Index>> layout;
  Index off = 0;
  for (const Var& p : parts) {
    v.middleRows(off, p.rows()) = p.value();
    layout.emplace_back(p.id(), off);
    off += p.rows();
  }
  return parts[0].tape()->push(std::move(v), parts, [layout](Tape& t, const Matrix& g) {
    for (const auto& [id, o] : layout) {
      if (t.needs_grad(id)) t.accumulate_expr(id, g.middleRows(o, t.value(id).rows()));
    }
  });
}

Var slice_cols(Var a, Index start, Index n) {
  if (start < 0 || n < 0 || start + n > a.cols()) throw ShapeError("slice_cols out of range");
  int ia = a.id();
  return a.tape()->push(a.value().middleCols(start, n), {a},
                        [ia, start, n](Tape& t, const Matrix& g) {
                          if (!t.needs_grad(ia)) return;
                          t.grad_buffer(ia).middleCols(start, n) += g;
                        });
}

Var slice_rows(Var a, Index start, Index n) {
  if (start < 0 || n < 0 || start + n > a.rows()) throw ShapeError("slice_rows out of range");
  int ia = a.id();
  return a.tape()->push(a.value().middleRows(start, n), {a},
                        [ia, start, n](Tape& t, const Matrix& g) {
                          if (!t.needs_grad(ia)) return;
                          t.grad_buffer(ia).middleRows(start, n) += g;
                        });
}

Var gather_rows(Var a, std::span<const int> idx) {
  const Matrix& x = a.value();
  Matrix v = Matrix::Zero(static_cast<Index>(idx.size()), x.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= x.rows()) throw ShapeError("gather_rows: index out of range");
    if (idx[r] >= 0) v.row(static_cast<Index>(r)) = x.row(idx[r]);
  }
  int ia = a.id();
  std::vector<int> index(idx.begin(), idx.end());
  return a.tape()->push(std::move(v), {a}, [ia, index = std::move(index)](Tape& t,
                                                                         const Matrix& g) {
    if (!t.needs_grad(ia)) return;
    Matrix& buf = t.grad_buffer(ia);
    for (std::size_t r = 0; r < index.size(); ++r) {
      if (index[r] >= 0) buf.row(index[r]) += g.row(static_cast<Index>(r));
    }
  });
}

Var segment_mean(Var a, std::span<const std::pair<int, int>> segments) {
  const Matrix& x = a.value();
  Matrix v(static_cast<Index>(segments.size()), x.cols());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto [b, e] = segments[s];
    if (b < 0 || e > x.rows() || e <= b) throw ShapeError("segment_mean: bad segment");
    v.row(static_cast<Index>(s)) = x.middleRows(b, e - b).colwise().mean();
  }
  int ia = a.id();
  std::vector<std::pair<int, int>> segs(segments.begin(), segments.end());
  return a.tape()->push(std::move(v), {a}, [ia, segs = std::move(segs)](Tape& t,
                                                                       const Matrix& g) {
    if (!t.needs_grad(ia)) return;
    Matrix& buf = t.grad_buffer(ia);
    for (std::size_t s = 0; s < segs.size(); ++s) {
      const auto [b, e] = segs[s];
      const double inv = 1.0 / (e - b);
      buf.middleRows(b, e - b).rowwise() += g.row(static_cast<Index>(s)) * inv;
    }
  });
}

namespace {

// Column block k of the result holds x shifted by (k - kernel/2) rows.
Matrix im2col(const Matrix& x, int kernel) {
  const Index T = x.rows(), C = x.cols();
  const int half = kernel / 2;
  Matrix cols = Matrix::Zero(T, C * kernel);
  for (int k = 0; k < kernel; ++k) {
    const Index shift = k - half;
    const Index lo = std::max<Index>(0, -shift);
    const Index hi = std::min<Index>(T, T - shift);
    if (hi > lo) cols.block(lo, k * C, hi - lo, C) = x.middleRows(lo + shift, hi - lo);
  }
  return cols;
}

}  // namespace

Var conv1d(Var x, Var w, Var b, int kernel) {
  if (kernel < 1 || kernel % 2 == 0) throw ShapeError("conv1d: kernel must be odd");
  const Index C = x.cols();
  if (w.rows() != C * kernel || b.rows() != 1 || b.cols() != w.cols()) {
    throw ShapeError("conv1d: weight " + shape_str(w.value()) + " incompatible with input " +
                     shape_str(x.value()));
  }
  Matrix cols = im2col(x.value(), kernel);
  Matrix v = cols * w.value();
  v.rowwise() += b.value().row(0);
  int ix = x.id(), iw = w.id(), ib = b.id();
  return x.tape()->push(
      std::move(v), {x, w, b},
      [ix, iw, ib, kernel, cols = std::move(cols)](Tape& t, const Matrix& g) {
        if (t.needs_grad(iw)) t.accumulate_expr(iw, cols.transpose() * g);
        if (t.needs_grad(ib)) t.accumulate_expr(ib, g.colwise().sum());
        if (!t.needs_grad(ix)) return;
        const Matrix dcols = g * t.value(iw).transpose();
        Matrix& buf = t.grad_buffer(ix);
        const Index T = buf.rows(), C = buf.cols();
        const int half = kernel / 2;
        for (int k = 0; k < kernel; ++k) {
          const Index shift = k - half;
          const Index lo = std::max<Index>(0, -shift);
          const Index hi = std::min<Index>(T, T - shift);
          if (hi > lo) buf.middleRows(lo + shift, hi - lo) += dcols.block(lo, k * C, hi - lo, C);
        }
      });
}

Var mse(Var pred, const Matrix& target) {
  require_same_shape(pred.value(), target, "mse");
  const double n = static_cast<double>(target.size());
  if (n == 0) throw ShapeError("mse of empty matrix");
  Matrix diff = pred.value() - target;
  Matrix v(1, 1);
  v(0, 0) = diff.squaredNorm() / n;
  int ip = pred.id();
  return pred.tape()->push(std::move(v), {pred},
                           [ip, n, diff = std::move(diff)](Tape& t, const Matrix& g) {
                             t.accumulate_expr(ip, diff * (2.0 * g(0, 0) / n));
                           });
}

}  // namespace wordpros::ad
