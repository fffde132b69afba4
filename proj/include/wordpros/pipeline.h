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

// Two-stage training, checkpoints and the two inference modes.

#ifndef WORDPROS_PIPELINE_H_
#define WORDPROS_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "wordpros/model.h"
#include "wordpros/optim.h"

namespace wordpros {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingPredictorError : public std::runtime_error {
 public:
  MissingPredictorError()
      : std::runtime_error(
            "checkpoint has no prosody predictor; run train-stage2 on it before TTS inference") {}
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Stage { kStage1, kStage2 };

/// Mutable training state saved alongside the parameters so runs resume
/// exactly.
struct TrainState {
  Stage stage = Stage::kStage1;
  std::int64_t step = 0;  // completed steps of `stage`
  nn::Rng rng;
  std::map<std::string, optim::Adam> optimizers;
};

struct Checkpoint {
  std::unique_ptr<Model> model;
  TrainState state;
};

/// Fresh Stage I state for a corpus: model sized from its inventory,
/// optimizers and random stream seeded from the config.
Checkpoint init_stage1(const RunConfig& config, const corpus::Corpus& corpus);

/// Binary format: "WPCK", u32 version, u64 header length, JSON header,
/// parameter values and optimizer moments as little-endian doubles, and a
/// trailing FNV-1a 64 checksum of everything before it. Written to a temporary
/// file and renamed into place.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws CheckpointError on a bad magic, version, checksum or truncation,
/// or when stored shapes disagree with the stored config.
Checkpoint load_checkpoint(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

// ---- Stage I -----------------------------------------------------------------

struct Stage1Log {
  std::int64_t step = 0;
  double alpha = 0;
  // Batch means per utterance.
  double acoustic_recon = 0, acoustic_kl = 0, acoustic_mse = 0;
  double duration_recon = 0, duration_kl = 0, duration_mse = 0;
};

struct TrainOptions {
  /// Train until this many steps are complete; < 0 uses the config value.
  std::int64_t until_step = -1;
  /// Called every log_every steps and on the first and last step.
  std::function<void(const Stage1Log&)> on_stage1_log;
  std::function<void(std::int64_t step, double loss, double lr)> on_stage2_log;
  /// Where to write the last good state if training diverges; empty skips.
  std::filesystem::path divergence_checkpoint;
};

/// Runs Stage I steps on `data`; returns one log entry per step taken.
/// Throws DivergenceError (after saving the pre-step state) on a non-finite
/// loss or gradient.
std::vector<Stage1Log> train_stage1(Checkpoint& ckpt, const std::vector<Example>& data,
                                    const TrainOptions& options = {});

std::vector<Example> prepare_examples(const Model& model, const corpus::Corpus& corpus);

// ---- Stage II ----------------------------------------------------------------

struct Posteriors {
  dist::DiagGaussianSeq acoustic;
  dist::DiagGaussianSeq duration;
};

/// Reference-encoder posteriors for one utterance, conditioned on its own
/// speaker.
Posteriors encode_posteriors(const Model& model, const Example& ex);

/// Posteriors of every corpus utterance. Stage I parameters are only read.
ProsodyTargetStore dump_targets(const Model& model, const corpus::Corpus& corpus);

struct Stage2Data {
  PredictorBatch inputs;  // every utterance, in corpus order
  std::vector<const ProsodyTarget*> targets;
  std::vector<std::string> ids;
};

/// Pairs each corpus utterance's pooled context embeddings and frozen speaker
/// embedding with its stored target. Throws if a target is missing or word
/// counts disagree.
Stage2Data prepare_stage2(const Model& model, const corpus::Corpus& corpus,
                          const ProsodyTargetStore& targets, const ContextEmbedder& embedder);

/// Adds an untrained predictor sized for `context_dim` and resets the state
/// to Stage II step 0. Stage I optimizers are dropped.
void init_stage2(Checkpoint& ckpt, Index context_dim);

/// Optimises the predictor only. Entry t of the result is the mean
/// per-utterance loss evaluated before update t.
std::vector<double> train_stage2(Checkpoint& ckpt, const Stage2Data& data,
                                 const TrainOptions& options = {});

/// Mean per-utterance predictor loss at the current parameters.
double evaluate_stage2(const Model& model, const Stage2Data& data);

// ---- inference ---------------------------------------------------------------

struct Synthesis {
  Matrix mel;               // sum(durations) x M
  std::vector<int> durations;
  Matrix z;                 // W x H used for decoding
  Matrix z_duration;        // W x H^D
};

/// Fine-grained transfer: latents are the reference posterior means (encoded
/// with the reference speaker); durations and frames are generated with the
/// target speaker only.
Synthesis infer_fpt(const Model& model, const corpus::Utterance& reference,
                    const std::string& target_speaker);

struct TtsInput {
  std::string id;
  std::string text;
  std::vector<std::string> phonemes;
  std::vector<int> word_lengths;
};

enum class SampleMode { kMean, kSample };

/// Text-to-speech from predicted latents. kSample draws mean +
/// temperature * sd * noise; temperature 0 equals kMean. Throws
/// MissingPredictorError without a trained predictor.
Synthesis infer_tts(const Model& model, const ContextEmbedder& embedder, const TtsInput& input,
                    const std::string& speaker, SampleMode mode = SampleMode::kMean,
                    double temperature = 1.0, nn::Rng* rng = nullptr);

/// Decodes with posterior-mean latents and the utterance's own durations.
Matrix copy_synthesis(const Model& model, const Example& ex);
/// Decodes with predicted mean latents and the utterance's own durations, so
/// frames line up with the recording.
Matrix tts_aligned(const Model& model, const ContextEmbedder& embedder,
                   const corpus::Utterance& u);

/// Mel frames from the prior: Z ~ N(0, I) drawn from `rng`, own durations.
Matrix prior_synthesis(const Model& model, const Example& ex, nn::Rng& rng);

/// Standard normal rows x cols, drawn without carrying distribution state.
Matrix gaussian_matrix(nn::Rng& rng, Index rows, Index cols);

}  // namespace wordpros

#endif  // WORDPROS_PIPELINE_H_
