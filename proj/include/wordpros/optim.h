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

#ifndef WORDPROS_OPTIM_H_
#define WORDPROS_OPTIM_H_

#include <cstdint>
#include <vector>

#include "wordpros/autodiff.h"

namespace wordpros::optim {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global-norm gradient clipping; <= 0 disables.
  double clip_norm = 5.0;
};

/// Adam over a fixed list of parameters. Moment buffers are exposed so that
/// checkpoints can resume training exactly.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<ad::Parameter*> params, AdamOptions options);

  /// Applies one update. Parameters absent from `grads` get a zero gradient.
  void step(const ad::Gradients& grads, double learning_rate);
  void step(const ad::Gradients& grads) { step(grads, options_.learning_rate); }

  std::int64_t steps_taken() const { return t_; }
  void set_steps_taken(std::int64_t t) { t_ = t; }
  std::vector<Matrix>& first_moments() { return m_; }
  std::vector<Matrix>& second_moments() { return v_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }
  const std::vector<ad::Parameter*>& params() const { return params_; }
  const AdamOptions& options() const { return options_; }

 private:
  std::vector<ad::Parameter*> params_;
  AdamOptions options_;
  std::vector<Matrix> m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace wordpros::optim

#endif  // WORDPROS_OPTIM_H_
