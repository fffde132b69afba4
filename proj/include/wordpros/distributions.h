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

// Diagonal-Gaussian sequence math: closed-form KL divergences with analytic
// gradients, reparameterised sampling, the KL annealing ramp and the
// reconstruction error. Each kernel exists twice: as a plain function on
// matrices, and as a tape op (namespace dist::op) whose backward pass calls
// the same analytic gradient.

#ifndef WORDPROS_DISTRIBUTIONS_H_
#define WORDPROS_DISTRIBUTIONS_H_

#include <cstdint>
#include <stdexcept>

#include "wordpros/autodiff.h"
#include "wordpros/tensor.h"

namespace wordpros::dist {

/// Variances below this are clamped before entering a log or sqrt.
inline constexpr double kVarianceFloor = 1e-6;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// One diagonal Gaussian per row (word): W x H means and variances.
struct DiagGaussianSeq {
  Matrix mean;
  Matrix var;

  Index words() const { return mean.rows(); }
  Index dims() const { return mean.cols(); }
  /// N(0, I) for every word.
  static DiagGaussianSeq standard(Index words, Index dims);
  /// Throws ShapeError on mismatched shapes, DomainError on var <= 0 or NaN.
  void validate() const;
};

struct AnnealSchedule {
  std::int64_t start_step = 0;
  std::int64_t end_step = 10000;

  void validate() const;
};

/// Per-word KL(g || N(0, I)), summed over dimensions. Length W.
Vector kl_to_standard_normal(const DiagGaussianSeq& g);
/// Per-word KL(p || q). The first argument is the distribution the
/// expectation is taken under.
Vector kl_diag_gaussians(const DiagGaussianSeq& p, const DiagGaussianSeq& q);

/// Gradients of sum_w upstream[w] * KL_w with respect to mean and variance.
struct GaussianGrad {
  Matrix d_mean;
  Matrix d_var;
};
GaussianGrad kl_to_standard_normal_grad(const DiagGaussianSeq& g, const Vector& upstream);
struct PairGrad {
  GaussianGrad p;
  GaussianGrad q;
};
PairGrad kl_diag_gaussians_grad(const DiagGaussianSeq& p, const DiagGaussianSeq& q,
                                const Vector& upstream);

/// mean + sqrt(var) * noise.
Matrix sample_reparam(const DiagGaussianSeq& g, const Matrix& noise);

/// Linear ramp: 0 up to start_step, 1 from end_step on.
double anneal_alpha(std::int64_t step, const AnnealSchedule& sched);

/// Mean squared error over all elements.
double recon_nll(const Matrix& pred, const Matrix& target);

namespace op {

/// W x 1 per-word KL to the standard normal.
ad::Var kl_to_standard_normal(ad::Var mean, ad::Var var);
/// W x 1 per-word KL(p || q).
ad::Var kl_diag_gaussians(ad::Var p_mean, ad::Var p_var, ad::Var q_mean, ad::Var q_var);
ad::Var sample_reparam(ad::Var mean, ad::Var var, const Matrix& noise);
/// 1 x 1 mean squared error.
ad::Var recon_nll(ad::Var pred, const Matrix& target);

}  // namespace op

}  // namespace wordpros::dist

#endif  // WORDPROS_DISTRIBUTIONS_H_
