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

#include "wordpros/duration.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wordpros {

void DurationConfig::validate() const {
  if (n_phonemes < 1 || mel_bins < 1 || speaker_dim < 1 || encoding_dim < 1 || latent_dim < 1 ||
      reference_width < 1 || head_width < 1) {
    throw std::invalid_argument("duration config: all dimensions must be positive");
  }
  if (encoder_layers < 1 || reference_layers < 1 || head_layers < 1) {
    throw std::invalid_argument("duration config: layer counts must be positive");
  }
  for (int k : {encoder_kernel, reference_kernel, head_kernel}) {
    if (k < 1 || k % 2 == 0) throw std::invalid_argument("duration config: kernels must be odd");
  }
}

DurationModel::DurationModel(const DurationConfig& config, nn::Rng& rng) : config_(config) {
  config_.validate();
  const auto& c = config_;
  phoneme_table_ = nn::Embedding::create(head_store_, "duration.phonemes", c.n_phonemes,
                                         c.encoding_dim, rng);
  encoder_ = nn::ConvStack::create(head_store_, "duration.encoder", c.encoding_dim,
                                   c.encoding_dim, c.encoder_layers, c.encoder_kernel, rng);
  reference_ = nn::ConvStack::create(reference_store_, "duration.reference",
                                     c.mel_bins + c.encoding_dim + c.speaker_dim, c.reference_width,
                                     c.reference_layers, c.reference_kernel, rng);
  reference_hidden_ = nn::Linear::create(reference_store_, "duration.reference.hidden",
                                         c.reference_width + 1, c.reference_width, rng);
  reference_mean_ = nn::Linear::create(reference_store_, "duration.reference.mean",
                                       c.reference_width, c.latent_dim, rng);
  reference_logvar_ = nn::Linear::create(reference_store_, "duration.reference.logvar",
                                         c.reference_width, c.latent_dim, rng, 0.1);
  head_ = nn::ConvStack::create(head_store_, "duration.head",
                                c.encoding_dim + c.latent_dim + c.speaker_dim, c.head_width,
                                c.head_layers, c.head_kernel, rng);
  head_out_ = nn::Linear::create(head_store_, "duration.head.out", c.head_width, 1, rng);
  // Start near one frame per phoneme rather than at an arbitrary scale.
  head_out_.bias->value.setConstant(1.0);
}

ad::Var DurationModel::encode_phonemes(ad::Tape& tape, std::span<const int> phoneme_ids) const {
  if (phoneme_ids.empty()) throw std::invalid_argument("encode_phonemes: empty phoneme sequence");
  return encoder_(tape, phoneme_table_(tape, phoneme_ids));
}

std::pair<ad::Var, ad::Var> DurationModel::encode_reference(ad::Tape& tape, const Matrix& mel,
                                                            ad::Var upsampled,
                                                            ad::Var speaker_row,
                                                            const Alignment& align) const {
  if (mel.cols() != config_.mel_bins || mel.rows() != upsampled.rows()) {
    throw ShapeError("duration reference: mel " + shape_str(mel) + " vs upsampled " +
                     shape_str(upsampled.value()));
  }
  const ad::Var parts[] = {tape.constant(mel), upsampled, broadcast_row(speaker_row, mel.rows())};
  ad::Var frames = reference_(tape, ad::concat_cols(parts));
  ad::Var hidden = ad::tanh(reference_hidden_(tape, pool_words(frames, align)));
  return {reference_mean_(tape, hidden), ad::exp(reference_logvar_(tape, hidden))};
}

std::vector<int> phoneme_word_index(std::span<const corpus::Span> word_spans) {
  std::vector<int> out;
  int expect = 0;
  for (std::size_t w = 0; w < word_spans.size(); ++w) {
    const auto [b, e] = word_spans[w];
    if (b != expect || e <= b) throw std::invalid_argument("word spans do not partition phonemes");
    out.insert(out.end(), e - b, static_cast<int>(w));
    expect = e;
  }
  return out;
}

ad::Var DurationModel::predict_log(ad::Tape& tape, ad::Var encodings, ad::Var z,
                                   ad::Var speaker_row,
                                   std::span<const corpus::Span> word_spans) const {
  const std::vector<int> word_of = phoneme_word_index(word_spans);
  if (static_cast<Index>(word_of.size()) != encodings.rows()) {
    throw ShapeError("predict_durations: word spans cover " + std::to_string(word_of.size()) +
                     " phonemes, have " + std::to_string(encodings.rows()));
  }
  if (z.rows() != static_cast<Index>(word_spans.size()) || z.cols() != config_.latent_dim) {
    throw ShapeError("predict_durations: latent " + shape_str(z.value()) + " for " +
                     std::to_string(word_spans.size()) + " words");
  }
  const ad::Var parts[] = {encodings, ad::gather_rows(z, word_of),
                           broadcast_row(speaker_row, encodings.rows())};
  return head_out_(tape, head_(tape, ad::concat_cols(parts)));
}

Matrix DurationModel::encode_phonemes(std::span<const int> phoneme_ids) const {
  ad::Tape tape;
  return encode_phonemes(tape, phoneme_ids).value();
}

dist::DiagGaussianSeq DurationModel::encode_duration_reference(const Matrix& mel,
                                                               const Matrix& encodings,
                                                               const Matrix& speaker,
                                                               const Alignment& align) const {
  ad::Tape tape;
  ad::Var up = upsample(tape.constant(encodings), align.durations);
  auto [mean, var] = encode_reference(tape, mel, up, tape.constant(speaker), align);
  return {mean.value(), var.value()};
}

std::vector<double> DurationModel::predict_durations(std::span<const int> phoneme_ids,
                                                     const Matrix& speaker, const Matrix& z,
                                                     std::span<const corpus::Span> word_spans) const {
  ad::Tape tape;
  ad::Var enc = encode_phonemes(tape, phoneme_ids);
  const Matrix log_d =
      predict_log(tape, enc, tape.constant(z), tape.constant(speaker), word_spans).value();
  std::vector<double> out(static_cast<std::size_t>(log_d.rows()));
  for (Index p = 0; p < log_d.rows(); ++p) out[p] = std::exp(log_d(p, 0));
  return out;
}

LossValue duration_loss(ad::Tape& tape, const DurationModel& model, const SpeakerTable& speakers,
                        const Example& ex, double alpha, const Matrix& noise,
                        const ReconScale& scale) {
  ad::Var enc = model.encode_phonemes(tape, ex.phoneme_ids);
  ad::Var spk = speakers.row(tape, ex.speaker);
  auto [mean, var] =
      model.encode_reference(tape, ex.mel, upsample(enc, ex.align.durations), spk, ex.align);
  ad::Var z = dist::op::sample_reparam(mean, var, noise);
  ad::Var log_d = model.predict_log(tape, enc, z, spk, ex.align.word_spans);
  Matrix target(ex.align.n_phonemes(), 1);
  for (int p = 0; p < ex.align.n_phonemes(); ++p) target(p, 0) = std::log1p(ex.align.durations[p]);
  ad::Var mse = dist::op::recon_nll(ad::softplus(log_d), target);
  ad::Var recon = ad::scale(mse, static_cast<double>(target.size()) / (2.0 * scale.variance));
  ad::Var kl = ad::sum(dist::op::kl_to_standard_normal(mean, var));
  LossValue out;
  out.total = ad::add(recon, ad::scale(kl, alpha));
  out.total_value = out.total.value()(0, 0);
  out.recon = recon.value()(0, 0);
  out.kl = kl.value()(0, 0);
  out.recon_mse = mse.value()(0, 0);
  check_finite_loss("duration_loss", out.total_value, out.recon, out.kl);
  return out;
}

std::vector<int> quantize_durations(std::span<const double> durations) {
  std::vector<int> out;
  out.reserve(durations.size());
  for (double d : durations) {
    if (!(d > 0) || !std::isfinite(d)) {
      throw std::invalid_argument("quantize_durations: duration must be positive and finite, got " +
                                  std::to_string(d));
    }
    out.push_back(std::max(1, static_cast<int>(std::lround(d))));
  }
  return out;
}

}  // namespace wordpros
