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

// Run configuration and the bundle of all trainable models.

#ifndef WORDPROS_MODEL_H_
#define WORDPROS_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "wordpros/acoustic.h"
#include "wordpros/corpus.h"
#include "wordpros/duration.h"
#include "wordpros/predictor.h"

namespace wordpros {

/// Everything a training run needs. Stored verbatim in checkpoints; see
/// docs/config.md for the key = value file format.
struct RunConfig {
  std::string corpus;
  std::uint64_t seed = 1;

  // Stage I dimensions.
  Index speaker_dim = 16;  // E
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
  Index duration_latent_dim = 4;  // H^D
  Index duration_encoding_dim = 32;
  Index duration_reference_width = 32;
  Index duration_head_width = 32;
  int duration_head_layers = 2;
  bool share_speaker_table = true;

  // Stage I optimisation.
  dist::AnnealSchedule anneal{0, 10000};
  double learning_rate = 1e-3;
  std::int64_t steps = 20000;
  int batch_size = 8;
  double clip_norm = 5.0;
  double acoustic_recon_variance = 1.0;
  double duration_recon_variance = 0.01;
  int log_every = 100;

  // Stage II.
  Index projection_dim = 32;
  Index lstm_hidden = 32;
  double stage2_learning_rate = 3e-3;
  std::int64_t stage2_steps = 2000;
  int stage2_batch_size = 0;  // 0: every utterance in each step
  std::string stage2_lr_schedule = "constant";  // or "cosine"
  std::string embedder = "hash";                // or "precomputed"
  Index hash_dim = 28;
  std::uint64_t hash_seed = 7;
  std::string embeddings_file;

  /// Parses key = value text; unknown keys are an error.
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& file);
  /// Canonical text form; parse(to_text()) reproduces the config.
  std::string to_text() const;
  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  std::uint64_t fingerprint() const;

  /// Copies the Stage II fields of `other`, which must agree with this
  /// config on every Stage I field.
  RunConfig with_stage2_settings(const RunConfig& other) const;
};

std::unique_ptr<ContextEmbedder> make_embedder(const RunConfig& config);

/// Stage I and (optionally) Stage II models plus the symbol tables they were
/// built for.
class Model {
 public:
  Model(const RunConfig& config, std::vector<std::string> phoneme_inventory,
        std::vector<std::string> speakers, Index mel_bins);

  const RunConfig& config() const { return config_; }
  const std::vector<std::string>& phonemes() const { return phonemes_; }
  const std::vector<std::string>& speakers() const { return speakers_; }
  Index mel_bins() const { return mel_bins_; }

  int phoneme_index(const std::string& symbol) const;  // throws if unknown
  int speaker_index(const std::string& speaker) const;  // throws if unknown

  /// Maps a corpus utterance onto model indices. Throws if a phoneme,
  /// speaker or mel width is unknown to the model.
  Example prepare(const corpus::Utterance& u) const;
  std::vector<int> phoneme_ids(const std::vector<std::string>& symbols) const;

  SpeakerTable& acoustic_speakers() { return *acoustic_speakers_; }
  const SpeakerTable& acoustic_speakers() const { return *acoustic_speakers_; }
  SpeakerTable& duration_speakers();
  const SpeakerTable& duration_speakers() const;
  AcousticModel& acoustic() { return *acoustic_; }
  const AcousticModel& acoustic() const { return *acoustic_; }
  DurationModel& duration() { return *duration_; }
  const DurationModel& duration() const { return *duration_; }

  bool has_predictor() const { return predictor_ != nullptr; }
  /// Creates an untrained predictor for context embeddings of width
  /// context_dim. Its initialisation depends only on the seed.
  void init_predictor(Index context_dim);
  ProsodyPredictor& predictor();
  const ProsodyPredictor& predictor() const;

  /// Every parameter group under a stable name, Stage I groups first.
  std::vector<std::pair<std::string, nn::ParamStore*>> param_groups();
  std::vector<std::pair<std::string, const nn::ParamStore*>> param_groups() const;
  /// Per-group checksums of the Stage I parameters.
  std::map<std::string, std::uint64_t> stage1_checksums() const;
  std::uint64_t fingerprint() const;

  /// Takes over the Stage II settings of `config`; throws ConfigError if it
  /// disagrees with the model on any Stage I field.
  void adopt_stage2_settings(const RunConfig& config);

 private:
  RunConfig config_;
  std::vector<std::string> phonemes_;
  std::vector<std::string> speakers_;
  Index mel_bins_;
  std::map<std::string, int> phoneme_lookup_;
  std::unique_ptr<SpeakerTable> acoustic_speakers_;
  std::unique_ptr<SpeakerTable> duration_speakers_;  // null when shared
  std::unique_ptr<AcousticModel> acoustic_;
  std::unique_ptr<DurationModel> duration_;
  std::unique_ptr<ProsodyPredictor> predictor_;
};

}  // namespace wordpros

#endif  // WORDPROS_MODEL_H_
