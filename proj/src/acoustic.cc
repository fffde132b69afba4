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

#include "wordpros/acoustic.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wordpros {

SpeakerTable::SpeakerTable(Index n_speakers, Index dim, nn::Rng& rng) {
  if (n_speakers < 1 || dim < 1) throw std::invalid_argument("speaker table needs positive sizes");
  table_ = nn::Embedding::create(store_, "speakers", n_speakers, dim, rng, 0.5);
}

void SpeakerTable::check(int speaker) const {
  if (speaker < 0 || speaker >= size()) {
    throw std::out_of_range("unknown speaker index " + std::to_string(speaker));
  }
}

ad::Var SpeakerTable::row(ad::Tape& tape, int speaker) const {
  check(speaker);
  const int idx[1] = {speaker};
  return table_(tape, idx);
}

ad::Var SpeakerTable::frozen_row(ad::Tape& tape, int speaker) const {
  return tape.constant(embedding(speaker));
}

Matrix SpeakerTable::embedding(int speaker) const {
  check(speaker);
  return table_.table->value.row(speaker);
}

void AcousticConfig::validate() const {
  if (n_phonemes < 1 || mel_bins < 1 || speaker_dim < 1 || encoding_dim < 1 || latent_dim < 1 ||
      reference_width < 1 || decoder_width < 1) {
    throw std::invalid_argument("acoustic config: all dimensions must be positive");
  }
  if (encoder_layers < 1 || reference_layers < 1 || decoder_layers < 1) {
    throw std::invalid_argument("acoustic config: layer counts must be positive");
  }
  for (int k : {encoder_kernel, reference_kernel, decoder_kernel}) {
    if (k < 1 || k % 2 == 0) throw std::invalid_argument("acoustic config: kernels must be odd");
  }
}

AcousticModel::AcousticModel(const AcousticConfig& config, nn::Rng& rng) : config_(config) {
  config_.validate();
  const auto& c = config_;
  phoneme_table_ = nn::Embedding::create(decoder_store_, "acoustic.phonemes", c.n_phonemes,
                                         c.encoding_dim, rng);
  encoder_ = nn::ConvStack::create(decoder_store_, "acoustic.encoder", c.encoding_dim,
                                   c.encoding_dim, c.encoder_layers, c.encoder_kernel, rng);
  reference_ = nn::ConvStack::create(reference_store_, "acoustic.reference",
                                     c.mel_bins + c.encoding_dim + c.speaker_dim, c.reference_width,
                                     c.reference_layers, c.reference_kernel, rng);
  reference_hidden_ = nn::Linear::create(reference_store_, "acoustic.reference.hidden",
                                         c.reference_width + 1, c.reference_width, rng);
  reference_mean_ = nn::Linear::create(reference_store_, "acoustic.reference.mean",
                                       c.reference_width, c.latent_dim, rng);
  reference_logvar_ = nn::Linear::create(reference_store_, "acoustic.reference.logvar",
                                         c.reference_width, c.latent_dim, rng, 0.1);
  decoder_ = nn::ConvStack::create(decoder_store_, "acoustic.decoder",
                                   c.encoding_dim + c.latent_dim + c.speaker_dim, c.decoder_width,
                                   c.decoder_layers, c.decoder_kernel, rng);
  decoder_out_ = nn::Linear::create(decoder_store_, "acoustic.decoder.out", c.decoder_width,
                                    c.mel_bins, rng);
}

ad::Var AcousticModel::encode_phonemes(ad::Tape& tape, std::span<const int> phoneme_ids) const {
  if (phoneme_ids.empty()) throw std::invalid_argument("encode_phonemes: empty phoneme sequence");
  return encoder_(tape, phoneme_table_(tape, phoneme_ids));
}

ad::Var pool_words(ad::Var frame_features, const Alignment& align) {
  align.require_nonempty_words();
  if (frame_features.rows() != align.n_frames()) {
    throw ShapeError("pool_words: " + std::to_string(frame_features.rows()) + " frames vs " +
                     std::to_string(align.n_frames()) + " aligned");
  }
  ad::Var pooled = ad::segment_mean(frame_features, align.word_frames);
  Matrix log_len(align.n_words(), 1);
  for (int w = 0; w < align.n_words(); ++w) {
    log_len(w, 0) = std::log(static_cast<double>(align.word_frames[w].second -
                                                 align.word_frames[w].first));
  }
  const ad::Var parts[] = {pooled, frame_features.tape()->constant(std::move(log_len))};
  return ad::concat_cols(parts);
}

std::pair<ad::Var, ad::Var> AcousticModel::encode_reference(ad::Tape& tape, const Matrix& mel,
                                                            ad::Var upsampled,
                                                            ad::Var speaker_row,
                                                            const Alignment& align) const {
  if (mel.cols() != config_.mel_bins || mel.rows() != upsampled.rows()) {
    throw ShapeError("acoustic reference: mel " + shape_str(mel) + " vs upsampled " +
                     shape_str(upsampled.value()));
  }
  const ad::Var parts[] = {tape.constant(mel), upsampled, broadcast_row(speaker_row, mel.rows())};
  ad::Var frames = reference_(tape, ad::concat_cols(parts));
  ad::Var hidden = ad::tanh(reference_hidden_(tape, pool_words(frames, align)));
  ad::Var mean = reference_mean_(tape, hidden);
  ad::Var var = ad::exp(reference_logvar_(tape, hidden));
  return {mean, var};
}

ad::Var AcousticModel::decode(ad::Tape& tape, ad::Var upsampled, ad::Var z, ad::Var speaker_row,
                              const Alignment& align) const {
  if (upsampled.rows() != align.n_frames() || z.rows() != align.n_words() ||
      z.cols() != config_.latent_dim) {
    throw ShapeError("decode: upsampled " + shape_str(upsampled.value()) + ", z " +
                     shape_str(z.value()) + " for " + std::to_string(align.n_frames()) +
                     " frames / " + std::to_string(align.n_words()) + " words");
  }
  const ad::Var parts[] = {upsampled, ad::gather_rows(z, align.frame_to_word),
                           broadcast_row(speaker_row, upsampled.rows())};
  return decoder_out_(tape, decoder_(tape, ad::concat_cols(parts)));
}

Matrix AcousticModel::encode_phonemes(std::span<const int> phoneme_ids) const {
  ad::Tape tape;
  return encode_phonemes(tape, phoneme_ids).value();
}

dist::DiagGaussianSeq AcousticModel::encode_acoustic_reference(const Matrix& mel,
                                                               const Matrix& encodings,
                                                               const Matrix& speaker,
                                                               const Alignment& align) const {
  ad::Tape tape;
  ad::Var up = upsample(tape.constant(encodings), align.durations);
  auto [mean, var] = encode_reference(tape, mel, up, tape.constant(speaker), align);
  return {mean.value(), var.value()};
}

Matrix AcousticModel::decode_mel(const Matrix& upsampled, const Matrix& z, const Matrix& speaker,
                                 const Alignment& align) const {
  ad::Tape tape;
  return decode(tape, tape.constant(upsampled), tape.constant(z), tape.constant(speaker), align)
      .value();
}

void check_finite_loss(const char* what, double total, double recon, double kl) {
  if (std::isfinite(total) && std::isfinite(recon) && std::isfinite(kl)) return;
  std::ostringstream msg;
  msg << what << ": non-finite loss (total=" << total << ", recon=" << recon << ", kl=" << kl
      << ")";
  throw std::runtime_error(msg.str());
}

LossValue acoustic_loss(ad::Tape& tape, const AcousticModel& model, const SpeakerTable& speakers,
                        const Example& ex, double alpha, const Matrix& noise,
                        const ReconScale& scale) {
  ad::Var enc = model.encode_phonemes(tape, ex.phoneme_ids);
  ad::Var up = upsample(enc, ex.align.durations);
  ad::Var spk = speakers.row(tape, ex.speaker);
  auto [mean, var] = model.encode_reference(tape, ex.mel, up, spk, ex.align);
  ad::Var z = dist::op::sample_reparam(mean, var, noise);
  ad::Var pred = model.decode(tape, up, z, spk, ex.align);
  ad::Var mse = dist::op::recon_nll(pred, ex.mel);
  const double n = static_cast<double>(ex.mel.size());
  ad::Var recon = ad::scale(mse, n / (2.0 * scale.variance));
  ad::Var kl = ad::sum(dist::op::kl_to_standard_normal(mean, var));
  LossValue out;
  out.total = ad::add(recon, ad::scale(kl, alpha));
  out.total_value = out.total.value()(0, 0);
  out.recon = recon.value()(0, 0);
  out.kl = kl.value()(0, 0);
  out.recon_mse = mse.value()(0, 0);
  check_finite_loss("acoustic_loss", out.total_value, out.recon, out.kl);
  return out;
}

}  // namespace wordpros
