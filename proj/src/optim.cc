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

#include "wordpros/optim.h"

#include <cmath>

namespace wordpros::optim {

Adam::Adam(std::vector<ad::Parameter*> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (const auto* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step(const ad::Gradients& grads, double learning_rate) {
  double clip = 1.0;
  if (options_.clip_norm > 0) {
    double sq = 0;
    for (const auto* p : params_) {
      if (const Matrix* g = grads.find(p)) sq += g->squaredNorm();
    }
    const double norm = std::sqrt(sq);
    if (norm > options_.clip_norm) clip = options_.clip_norm / norm;
  }
  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Matrix* g = grads.find(params_[i]);
    if (g != nullptr) {
      m_[i] = b1 * m_[i] + (1 - b1) * clip * *g;
      v_[i] = b2 * v_[i] + (1 - b2) * (clip * clip) * g->cwiseAbs2();
    } else {
      m_[i] *= b1;
      v_[i] *= b2;
    }
    params_[i]->value.array() -=
        learning_rate * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + options_.epsilon);
  }
}

}  // namespace wordpros::optim
