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

#include "wordpros/distributions.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace wordpros::dist {

namespace {

void check_var(const Matrix& var, const char* what) {
  for (Index i = 0; i < var.size(); ++i) {
    const double v = var.data()[i];
    if (!(v > 0) || !std::isfinite(v)) {
      throw DomainError(std::string(what) + ": variance must be positive and finite, got " +
                        std::to_string(v));
    }
  }
}

double floored(double v) { return std::max(v, kVarianceFloor); }

// Per-dimension terms, shared by the matrix kernels and the tape ops.
double kl_std_term(double m, double v) {
  v = floored(v);
  return std::max(0.0, 0.5 * (v + m * m - 1.0 - std::log(v)));
}

double kl_pair_term(double pm, double pv, double qm, double qv) {
  pv = floored(pv);
  qv = floored(qv);
  const double d = pm - qm;
  return std::max(0.0, 0.5 * (std::log(qv / pv) + (pv + d * d) / qv - 1.0));
}

Vector kl_std_rows(const Matrix& mean, const Matrix& var) {
  Vector out = Vector::Zero(mean.rows());
  for (Index w = 0; w < mean.rows(); ++w) {
    for (Index h = 0; h < mean.cols(); ++h) out(w) += kl_std_term(mean(w, h), var(w, h));
  }
  return out;
}

Vector kl_pair_rows(const Matrix& pm, const Matrix& pv, const Matrix& qm, const Matrix& qv) {
  Vector out = Vector::Zero(pm.rows());
  for (Index w = 0; w < pm.rows(); ++w) {
    for (Index h = 0; h < pm.cols(); ++h) out(w) += kl_pair_term(pm(w, h), pv(w, h), qm(w, h), qv(w, h));
  }
  return out;
}

// d/dv is zero where the floor is active.
GaussianGrad kl_std_grad(const Matrix& mean, const Matrix& var, const Vector& up) {
  GaussianGrad g{Matrix(mean.rows(), mean.cols()), Matrix(mean.rows(), mean.cols())};
  for (Index w = 0; w < mean.rows(); ++w) {
    for (Index h = 0; h < mean.cols(); ++h) {
      const double v = var(w, h);
      g.d_mean(w, h) = up(w) * mean(w, h);
      g.d_var(w, h) = v < kVarianceFloor ? 0.0 : up(w) * 0.5 * (1.0 - 1.0 / v);
    }
  }
  return g;
}

PairGrad kl_pair_grad(const Matrix& pm, const Matrix& pv, const Matrix& qm, const Matrix& qv,
                      const Vector& up) {
  const Index W = pm.rows(), H = pm.cols();
  PairGrad g{{Matrix(W, H), Matrix(W, H)}, {Matrix(W, H), Matrix(W, H)}};
  for (Index w = 0; w < W; ++w) {
    for (Index h = 0; h < H; ++h) {
      const double p_v = floored(pv(w, h)), q_v = floored(qv(w, h));
      const double d = pm(w, h) - qm(w, h);
      g.p.d_mean(w, h) = up(w) * d / q_v;
      g.q.d_mean(w, h) = -up(w) * d / q_v;
      g.p.d_var(w, h) = pv(w, h) < kVarianceFloor ? 0.0 : up(w) * 0.5 * (1.0 / q_v - 1.0 / p_v);
      g.q.d_var(w, h) = qv(w, h) < kVarianceFloor
                            ? 0.0
                            : up(w) * 0.5 * (1.0 / q_v - (p_v + d * d) / (q_v * q_v));
    }
  }
  return g;
}

}  // namespace

DiagGaussianSeq DiagGaussianSeq::standard(Index words, Index dims) {
  return {Matrix::Zero(words, dims), Matrix::Ones(words, dims)};
}

void DiagGaussianSeq::validate() const {
  require_same_shape(mean, var, "DiagGaussianSeq");
  check_var(var, "DiagGaussianSeq");
}

void AnnealSchedule::validate() const {
  if (start_step < 0 || end_step <= start_step) {
    throw std::invalid_argument("anneal schedule needs 0 <= start_step < end_step");
  }
}

Vector kl_to_standard_normal(const DiagGaussianSeq& g) {
  g.validate();
  return kl_std_rows(g.mean, g.var);
}

Vector kl_diag_gaussians(const DiagGaussianSeq& p, const DiagGaussianSeq& q) {
  require_same_shape(p.mean, q.mean, "kl_diag_gaussians");
  p.validate();
  q.validate();
  return kl_pair_rows(p.mean, p.var, q.mean, q.var);
}

GaussianGrad kl_to_standard_normal_grad(const DiagGaussianSeq& g, const Vector& upstream) {
  g.validate();
  return kl_std_grad(g.mean, g.var, upstream);
}

PairGrad kl_diag_gaussians_grad(const DiagGaussianSeq& p, const DiagGaussianSeq& q,
                                const Vector& upstream) {
  require_same_shape(p.mean, q.mean, "kl_diag_gaussians_grad");
  p.validate();
  q.validate();
  return kl_pair_grad(p.mean, p.var, q.mean, q.var, upstream);
}

Matrix sample_reparam(const DiagGaussianSeq& g, const Matrix& noise) {
  require_same_shape(g.mean, noise, "sample_reparam");
  require_same_shape(g.mean, g.var, "sample_reparam");
  check_var(g.var, "sample_reparam");
  return g.mean + (g.var.array().max(kVarianceFloor).sqrt() * noise.array()).matrix();
}

double anneal_alpha(std::int64_t step, const AnnealSchedule& sched) {
  if (step <= sched.start_step) return 0.0;
  if (step >= sched.end_step) return 1.0;
  return static_cast<double>(step - sched.start_step) /
         static_cast<double>(sched.end_step - sched.start_step);
}

double recon_nll(const Matrix& pred, const Matrix& target) {
  require_same_shape(pred, target, "recon_nll");
  if (pred.size() == 0) return 0.0;
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

namespace op {

ad::Var kl_to_standard_normal(ad::Var mean, ad::Var var) {
  require_same_shape(mean.value(), var.value(), "kl_to_standard_normal");
  Matrix v = kl_std_rows(mean.value(), var.value());
  const int im = mean.id(), iv = var.id();
  return mean.tape()->push(std::move(v), {mean, var}, [im, iv](ad::Tape& t, const Matrix& g) {
    const GaussianGrad gr = kl_std_grad(t.value(im), t.value(iv), g.col(0));
    t.accumulate(im, gr.d_mean);
    t.accumulate(iv, gr.d_var);
  });
}

ad::Var kl_diag_gaussians(ad::Var p_mean, ad::Var p_var, ad::Var q_mean, ad::Var q_var) {
  require_same_shape(p_mean.value(), q_mean.value(), "kl_diag_gaussians");
  require_same_shape(p_mean.value(), p_var.value(), "kl_diag_gaussians");
  require_same_shape(q_mean.value(), q_var.value(), "kl_diag_gaussians");
  Matrix v = kl_pair_rows(p_mean.value(), p_var.value(), q_mean.value(), q_var.value());
  const int a = p_mean.id(), b = p_var.id(), c = q_mean.id(), d = q_var.id();
  return p_mean.tape()->push(std::move(v), {p_mean, p_var, q_mean, q_var},
                             [a, b, c, d](ad::Tape& t, const Matrix& g) {
                               const PairGrad gr = kl_pair_grad(t.value(a), t.value(b), t.value(c),
                                                                t.value(d), g.col(0));
                               t.accumulate(a, gr.p.d_mean);
                               t.accumulate(b, gr.p.d_var);
                               t.accumulate(c, gr.q.d_mean);
                               t.accumulate(d, gr.q.d_var);
                             });
}

ad::Var sample_reparam(ad::Var mean, ad::Var var, const Matrix& noise) {
  require_same_shape(mean.value(), noise, "sample_reparam");
  require_same_shape(mean.value(), var.value(), "sample_reparam");
  const Matrix sd = var.value().array().max(kVarianceFloor).sqrt().matrix();
  Matrix v = mean.value() + sd.cwiseProduct(noise);
  const int im = mean.id(), iv = var.id();
  return mean.tape()->push(std::move(v), {mean, var},
                           [im, iv, sd, noise](ad::Tape& t, const Matrix& g) {
                             t.accumulate(im, g);
                             if (!t.needs_grad(iv)) return;
                             const Matrix& var = t.value(iv);
                             Matrix dv(var.rows(), var.cols());
                             for (Index i = 0; i < var.size(); ++i) {
                               dv.data()[i] = var.data()[i] < kVarianceFloor
                                                  ? 0.0
                                                  : g.data()[i] * noise.data()[i] /
                                                        (2.0 * sd.data()[i]);
                             }
                             t.accumulate(iv, dv);
                           });
}

ad::Var recon_nll(ad::Var pred, const Matrix& target) { return ad::mse(pred, target); }

}  // namespace op

}  // namespace wordpros::dist
