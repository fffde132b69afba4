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

// Stage I duration model: its own phoneme encoder, a word-level variational
// reference encoder over the mel, and a log-domain per-phoneme duration head.

#ifndef WORDPROS_DURATION_H_
#define WORDPROS_DURATION_H_

#include <span>
#include <utility>
#include <vector>

#include "wordpros/acoustic.h"

namespace wordpros {

struct DurationConfig {
  Index n_phonemes = 0;
  Index mel_bins = 80;
  Index speaker_dim = 16;
  Index encoding_dim = 32;
  Index latent_dim = 4;  // H^D
  int encoder_layers = 2;
  int encoder_kernel = 5;
  Index reference_width = 32;
  int reference_layers = 2;
  int reference_kernel = 3;
  Index head_width = 32;
  int head_layers = 2;
  int head_kernel = 3;

  void validate() const;
};

class DurationModel {
 public:
  DurationModel(const DurationConfig& config, nn::Rng& rng);

  const DurationConfig& config() const { return config_; }
  /// Phoneme encoder + duration head.
  nn::ParamStore& head_params() { return head_store_; }
  const nn::ParamStore& head_params() const { return head_store_; }
  /// Reference encoder.
  nn::ParamStore& reference_params() { return reference_store_; }
  const nn::ParamStore& reference_params() const { return reference_store_; }

  ad::Var encode_phonemes(ad::Tape& tape, std::span<const int> phoneme_ids) const;
  std::pair<ad::Var, ad::Var> encode_reference(ad::Tape& tape, const Matrix& mel,
                                               ad::Var upsampled, ad::Var speaker_row,
                                               const Alignment& align) const;
  /// P x 1 log durations. Word i's latent row is shared by its phonemes.
  ad::Var predict_log(ad::Tape& tape, ad::Var encodings, ad::Var z, ad::Var speaker_row,
                      std::span<const corpus::Span> word_spans) const;

  Matrix encode_phonemes(std::span<const int> phoneme_ids) const;
  dist::DiagGaussianSeq encode_duration_reference(const Matrix& mel, const Matrix& encodings,
                                                  const Matrix& speaker,
                                                  const Alignment& align) const;
  /// Strictly positive real frame counts, one per phoneme.
  std::vector<double> predict_durations(std::span<const int> phoneme_ids, const Matrix& speaker,
                                        const Matrix& z,
                                        std::span<const corpus::Span> word_spans) const;

 private:
  DurationConfig config_;
  nn::ParamStore head_store_;
  nn::ParamStore reference_store_;
  nn::Embedding phoneme_table_;
  nn::ConvStack encoder_;
  nn::ConvStack reference_;
  nn::Linear reference_hidden_;
  nn::Linear reference_mean_;
  nn::Linear reference_logvar_;
  nn::ConvStack head_;
  nn::Linear head_out_;
};

/// recon compares log(1 + d) with softplus of the log-duration head, which is
/// exactly log(1 + predicted d). total = recon + alpha * sum of per-word KL.
LossValue duration_loss(ad::Tape& tape, const DurationModel& model, const SpeakerTable& speakers,
                        const Example& ex, double alpha, const Matrix& noise,
                        const ReconScale& scale);

/// Round half away from zero, at least one frame. Throws std::invalid_argument
/// on non-positive or non-finite input.
std::vector<int> quantize_durations(std::span<const double> durations);

/// Phoneme -> word index for contiguous spans.
std::vector<int> phoneme_word_index(std::span<const corpus::Span> word_spans);

}  // namespace wordpros

#endif  // WORDPROS_DURATION_H_
