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

#include "wordpros/nn.h"

#include <cmath>
#include <stdexcept>

namespace wordpros::nn {

ad::Parameter* ParamStore::create(const std::string& name, Matrix init) {
  if (find(name) != nullptr) throw std::invalid_argument("duplicate parameter " + name);
  params_.push_back(std::make_unique<ad::Parameter>(ad::Parameter{name, std::move(init)}));
  return params_.back().get();
}

ad::Parameter* ParamStore::find(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const ad::Parameter* ParamStore::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

std::vector<ad::Parameter*> ParamStore::all() {
  std::vector<ad::Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const ad::Parameter*> ParamStore::all() const {
  std::vector<const ad::Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::size_t ParamStore::num_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

std::uint64_t ParamStore::checksum() const {
  std::uint64_t h = fnv1a(nullptr, 0);
  for (const auto& p : params_) {
    h = fnv1a(p->name.data(), p->name.size(), h);
    const std::int64_t shape[2] = {p->value.rows(), p->value.cols()};
    h = fnv1a(shape, sizeof(shape), h);
    h = fnv1a(p->value.data(), sizeof(double) * static_cast<std::size_t>(p->value.size()), h);
  }
  return h;
}

bool ParamStore::all_finite() const {
  for (const auto& p : params_) {
    if (!p->value.allFinite()) return false;
  }
  return true;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (other.params_.size() != params_.size()) {
    throw std::invalid_argument("parameter count mismatch");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& src = *other.params_[i];
    auto& dst = *params_[i];
    if (src.name != dst.name) throw std::invalid_argument("parameter name mismatch: " + src.name);
    require_same_shape(dst.value, src.value, dst.name.c_str());
    dst.value = src.value;
  }
}

Matrix glorot(Index rows, Index cols, Rng& rng, double gain) {
  const double limit = gain * std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Linear Linear::create(ParamStore& store, const std::string& name, Index in, Index out, Rng& rng,
                      double gain) {
  Linear l;
  l.weight = store.create(name + ".weight", glorot(in, out, rng, gain));
  l.bias = store.create(name + ".bias", Matrix::Zero(1, out));
  return l;
}

ad::Var Linear::operator()(ad::Tape& tape, ad::Var x) const {
  return ad::add_bias(ad::matmul(x, tape.param(*weight)), tape.param(*bias));
}

Conv1d Conv1d::create(ParamStore& store, const std::string& name, Index in, Index out,
                      int kernel, Rng& rng) {
  Conv1d c;
  c.kernel = kernel;
  c.weight = store.create(name + ".weight", glorot(in * kernel, out, rng));
  c.bias = store.create(name + ".bias", Matrix::Zero(1, out));
  return c;
}

ad::Var Conv1d::operator()(ad::Tape& tape, ad::Var x) const {
  return ad::conv1d(x, tape.param(*weight), tape.param(*bias), kernel);
}

Embedding Embedding::create(ParamStore& store, const std::string& name, Index n, Index dim,
                            Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(n, dim);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return Embedding{store.create(name + ".table", std::move(m))};
}

ad::Var Embedding::operator()(ad::Tape& tape, std::span<const int> ids) const {
  for (int id : ids) {
    if (id < 0 || id >= table->value.rows()) {
      throw std::out_of_range("embedding id " + std::to_string(id) + " outside table of " +
                              std::to_string(table->value.rows()));
    }
  }
  return ad::gather_rows(tape.param(*table), ids);
}

ConvStack ConvStack::create(ParamStore& store, const std::string& name, Index in, Index width,
                            int n_layers, int kernel, Rng& rng) {
  ConvStack s;
  Index cur = in;
  for (int i = 0; i < n_layers; ++i) {
    s.layers.push_back(
        Conv1d::create(store, name + ".conv" + std::to_string(i), cur, width, kernel, rng));
    cur = width;
  }
  return s;
}

ad::Var ConvStack::operator()(ad::Tape& tape, ad::Var x) const {
  ad::Var h = x;
  for (const auto& layer : layers) {
    ad::Var y = ad::tanh(layer(tape, h));
    h = (y.cols() == h.cols()) ? ad::add(h, y) : y;
  }
  return h;
}

int ConvStack::receptive_radius() const {
  int r = 0;
  for (const auto& layer : layers) r += layer.kernel / 2;
  return r;
}

Lstm Lstm::create(ParamStore& store, const std::string& name, Index in, Index hidden, Rng& rng) {
  Lstm l;
  l.w_input = store.create(name + ".w_input", glorot(in, 4 * hidden, rng));
  l.w_hidden = store.create(name + ".w_hidden", glorot(hidden, 4 * hidden, rng));
  Matrix b = Matrix::Zero(1, 4 * hidden);
  b.middleCols(hidden, hidden).setOnes();  // forget-gate bias
  l.bias = store.create(name + ".bias", std::move(b));
  return l;
}

std::vector<ad::Var> Lstm::operator()(ad::Tape& tape, std::span<const ad::Var> steps) const {
  std::vector<ad::Var> out;
  if (steps.empty()) return out;
  const Index h = hidden();
  const Index batch = steps[0].rows();
  ad::Var wx = tape.param(*w_input);
  ad::Var wh = tape.param(*w_hidden);
  ad::Var b = tape.param(*bias);
  ad::Var hprev = tape.constant(Matrix::Zero(batch, h));
  ad::Var cprev = tape.constant(Matrix::Zero(batch, h));
  out.reserve(steps.size());
  for (const ad::Var& x : steps) {
    ad::Var gates = ad::add_bias(ad::add(ad::matmul(x, wx), ad::matmul(hprev, wh)), b);
    ad::Var i = ad::sigmoid(ad::slice_cols(gates, 0, h));
    ad::Var f = ad::sigmoid(ad::slice_cols(gates, h, h));
    ad::Var g = ad::tanh(ad::slice_cols(gates, 2 * h, h));
    ad::Var o = ad::sigmoid(ad::slice_cols(gates, 3 * h, h));
    cprev = ad::add(ad::mul(f, cprev), ad::mul(i, g));
    hprev = ad::mul(o, ad::tanh(cprev));
    out.push_back(hprev);
  }
  return out;
}

}  // namespace wordpros::nn
