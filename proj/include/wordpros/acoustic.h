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

// Stage I acoustic model: phoneme encoder, duration upsampler, word-level
// variational reference encoder and a non-autoregressive convolutional
// decoder.

#ifndef WORDPROS_ACOUSTIC_H_
#define WORDPROS_ACOUSTIC_H_

#include <cstdint>
#include <span>
#include <utility>

#include "wordpros/alignment.h"
#include "wordpros/distributions.h"
#include "wordpros/nn.h"

namespace wordpros {

/// Learned speaker lookup table, n_speakers x dim.
class SpeakerTable {
 public:
  SpeakerTable(Index n_speakers, Index dim, nn::Rng& rng);

  ad::Var row(ad::Tape& tape, int speaker) const;
  /// Frozen lookup: the row enters the tape as a constant.
  ad::Var frozen_row(ad::Tape& tape, int speaker) const;
  Matrix embedding(int speaker) const;

  Index size() const { return table_.size(); }
  Index dim() const { return table_.dim(); }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }

 private:
  void check(int speaker) const;
  nn::ParamStore store_;
  nn::Embedding table_;
};

struct AcousticConfig {
  Index n_phonemes = 0;
  Index mel_bins = 80;
  Index speaker_dim = 16;   // E
  Index encoding_dim = 64;  // J
  Index latent_dim = 8;     // H
  int encoder_layers = 2;
  int encoder_kernel = 5;
  Index reference_width = 64;
  int reference_layers = 2;
  int reference_kernel = 3;
  Index decoder_width = 96;
  int decoder_layers = 3;
  int decoder_kernel = 3;

  void validate() const;
};

/// Per-step loss weighting shared by the Stage I models.
struct ReconScale {
  /// Fixed observation variance of the Gaussian likelihood. The
  /// reconstruction term is n * mse / (2 * variance) for n observed values.
  double variance = 1.0;
};

struct LossValue {
  ad::Var total;  // on the tape, for backward()
  double total_value = 0;
  double recon = 0;
  double kl = 0;
  double recon_mse = 0;  // plain mean squared error, for reporting
};

class AcousticModel {
 public:
  AcousticModel(const AcousticConfig& config, nn::Rng& rng);

  const AcousticConfig& config() const { return config_; }
  /// Phoneme encoder + decoder.
  nn::ParamStore& decoder_params() { return decoder_store_; }
  const nn::ParamStore& decoder_params() const { return decoder_store_; }
  /// Reference encoder.
  nn::ParamStore& reference_params() { return reference_store_; }
  const nn::ParamStore& reference_params() const { return reference_store_; }

  ad::Var encode_phonemes(ad::Tape& tape, std::span<const int> phoneme_ids) const;
  /// Returns (mean, variance), one row per word.
  std::pair<ad::Var, ad::Var> encode_reference(ad::Tape& tape, const Matrix& mel,
                                               ad::Var upsampled, ad::Var speaker_row,
                                               const Alignment& align) const;
  ad::Var decode(ad::Tape& tape, ad::Var upsampled, ad::Var z, ad::Var speaker_row,
                 const Alignment& align) const;

  Matrix encode_phonemes(std::span<const int> phoneme_ids) const;
  dist::DiagGaussianSeq encode_acoustic_reference(const Matrix& mel, const Matrix& encodings,
                                                  const Matrix& speaker,
                                                  const Alignment& align) const;
  Matrix decode_mel(const Matrix& upsampled, const Matrix& z, const Matrix& speaker,
                    const Alignment& align) const;

  /// Frames on either side of t that can influence decoded frame t, given
  /// fixed upsampled encodings.
  int decoder_receptive_radius() const { return decoder_.receptive_radius(); }

 private:
  AcousticConfig config_;
  nn::ParamStore decoder_store_;
  nn::ParamStore reference_store_;
  nn::Embedding phoneme_table_;
  nn::ConvStack encoder_;
  nn::ConvStack reference_;
  nn::Linear reference_hidden_;
  nn::Linear reference_mean_;
  nn::Linear reference_logvar_;
  nn::ConvStack decoder_;
  nn::Linear decoder_out_;
};

/// Negated ELBO for one utterance: recon + alpha * sum of per-word KL to the
/// standard normal, with Z drawn from the posterior using `noise` (W x H).
/// Throws std::runtime_error carrying the components if the result is not
/// finite.
LossValue acoustic_loss(ad::Tape& tape, const AcousticModel& model, const SpeakerTable& speakers,
                        const Example& ex, double alpha, const Matrix& noise,
                        const ReconScale& scale);

/// Shared reference-encoder front end: features pooled per word, plus the
/// log frame count of the word.
ad::Var pool_words(ad::Var frame_features, const Alignment& align);

void check_finite_loss(const char* what, double total, double recon, double kl);

}  // namespace wordpros

#endif  // WORDPROS_ACOUSTIC_H_
