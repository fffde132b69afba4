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

// Parameter storage and the handful of layers the models are built from.

#ifndef WORDPROS_NN_H_
#define WORDPROS_NN_H_

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "wordpros/autodiff.h"

namespace wordpros::nn {

using Rng = std::mt19937_64;

/// Owns named parameters at stable addresses. Move-only: layers keep raw
/// pointers into it.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;

  ad::Parameter* create(const std::string& name, Matrix init);
  ad::Parameter* find(const std::string& name);
  const ad::Parameter* find(const std::string& name) const;

  std::vector<ad::Parameter*> all();
  std::vector<const ad::Parameter*> all() const;
  std::size_t size() const { return params_.size(); }
  std::size_t num_values() const;

  /// Order-sensitive hash of names, shapes and values.
  std::uint64_t checksum() const;
  bool all_finite() const;
  /// Copies values from `other`; names and shapes must match exactly.
  void copy_values_from(const ParamStore& other);

 private:
  std::vector<std::unique_ptr<ad::Parameter>> params_;
};

/// Glorot-uniform initialised matrix.
Matrix glorot(Index rows, Index cols, Rng& rng, double gain = 1.0);

struct Linear {
  ad::Parameter* weight = nullptr;  // in x out
  ad::Parameter* bias = nullptr;    // 1 x out

  static Linear create(ParamStore& store, const std::string& name, Index in, Index out,
                       Rng& rng, double gain = 1.0);
  ad::Var operator()(ad::Tape& tape, ad::Var x) const;
  Index in() const { return weight->value.rows(); }
  Index out() const { return weight->value.cols(); }
};

struct Conv1d {
  ad::Parameter* weight = nullptr;  // (kernel * in) x out
  ad::Parameter* bias = nullptr;
  int kernel = 1;

  static Conv1d create(ParamStore& store, const std::string& name, Index in, Index out,
                       int kernel, Rng& rng);
  ad::Var operator()(ad::Tape& tape, ad::Var x) const;
  Index out() const { return weight->value.cols(); }
};

struct Embedding {
  ad::Parameter* table = nullptr;  // n x dim

  static Embedding create(ParamStore& store, const std::string& name, Index n, Index dim,
                          Rng& rng, double stddev = 0.3);
  ad::Var operator()(ad::Tape& tape, std::span<const int> ids) const;
  Index size() const { return table->value.rows(); }
  Index dim() const { return table->value.cols(); }
};

/// Stack of "same"-padded tanh convolutions with residual connections where
/// widths agree. Each layer widens the receptive field by kernel - 1 rows.
struct ConvStack {
  std::vector<Conv1d> layers;

  static ConvStack create(ParamStore& store, const std::string& name, Index in, Index width,
                          int n_layers, int kernel, Rng& rng);
  ad::Var operator()(ad::Tape& tape, ad::Var x) const;
  /// Rows on either side of t that can influence output row t.
  int receptive_radius() const;
  Index out() const { return layers.empty() ? 0 : layers.back().out(); }
};

/// Single-layer unidirectional LSTM. Inputs are one (batch x in) matrix per
/// time step; outputs one (batch x hidden) matrix per step.
struct Lstm {
  ad::Parameter* w_input = nullptr;   // in x 4h, gate order i f g o
  ad::Parameter* w_hidden = nullptr;  // h x 4h
  ad::Parameter* bias = nullptr;      // 1 x 4h

  static Lstm create(ParamStore& store, const std::string& name, Index in, Index hidden,
                     Rng& rng);
  std::vector<ad::Var> operator()(ad::Tape& tape, std::span<const ad::Var> steps) const;
  Index hidden() const { return w_hidden->value.rows(); }
};

}  // namespace wordpros::nn

#endif  // WORDPROS_NN_H_
