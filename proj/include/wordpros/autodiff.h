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

// Minimal reverse-mode automatic differentiation over dense matrices.
//
// A Tape records every operation of one forward pass. Parameters are owned
// outside the tape (by the models); backward() writes their gradients into a
// Gradients accumulator so several tapes (one per utterance) can be summed
// before a single optimizer update.

#ifndef WORDPROS_AUTODIFF_H_
#define WORDPROS_AUTODIFF_H_

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wordpros/tensor.h"

namespace wordpros::ad {

struct Parameter {
  std::string name;
  Matrix value;
};

/// Gradient accumulator keyed by parameter identity.
class Gradients {
 public:
  /// Zero-initialised on first access.
  Matrix& at(const Parameter* p);
  const Matrix* find(const Parameter* p) const;
  void add(const Gradients& other);
  void scale(double s);
  bool empty() const { return grads_.empty(); }
  void clear() { grads_.clear(); }

 private:
  std::unordered_map<const Parameter*, Matrix> grads_;
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var param(Parameter& p);

  /// Records an op node. `inputs` decide whether the node needs a gradient.
  Var push(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  Var push(Matrix value, std::span<const Var> inputs, Backward backward);

  /// Back-propagates from a 1x1 node and accumulates parameter gradients.
  void backward(Var root, Gradients& out);

  const Matrix& value(int id) const { return nodes_[id].value; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  /// Adds `g` into the gradient of node `id` if it needs one.
  void accumulate(int id, const Matrix& g);
  template <typename Expr>
  void accumulate_expr(int id, const Expr& g) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }
  /// Mutable gradient block for scatter-style backward passes.
  Matrix& grad_buffer(int id);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
};

// ---- elementwise and linear-algebra ops ------------------------------------

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
/// a (n x m) + bias (1 x m) broadcast over rows.
Var add_bias(Var a, Var bias);
Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
/// log(1 + exp(a)), numerically stable.
Var softplus(Var a);
Var square(Var a);

Var sum(Var a);
Var mean(Var a);
/// n x m -> n x 1.
Var row_sum(Var a);
/// Sum of `a` (n x 1 or 1 x n) weighted by constant `w` -> 1 x 1.
Var weighted_sum(Var a, const Matrix& w);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, Index start, Index n);
Var slice_rows(Var a, Index start, Index n);

/// Output row r is input row idx[r]; idx[r] < 0 produces a zero row.
Var gather_rows(Var a, std::span<const int> idx);
/// Output row s is the mean of input rows [segments[s].first, .second).
Var segment_mean(Var a, std::span<const std::pair<int, int>> segments);

/// "Same"-padded 1-D convolution along rows.
/// x: T x C, w: (kernel * C) x out, b: 1 x out. Row t of the output reads input
/// rows t - kernel/2 .. t + kernel/2 with zero padding outside [0, T).
Var conv1d(Var x, Var w, Var b, int kernel);

/// Mean of squared differences against a constant target -> 1 x 1.
Var mse(Var pred, const Matrix& target);

}  // namespace wordpros::ad

#endif  // WORDPROS_AUTODIFF_H_
