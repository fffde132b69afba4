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

// Stage II: contextual text embeddings, the word-level prosody predictor and
// the store of Stage I posteriors it is trained against.

#ifndef WORDPROS_PREDICTOR_H_
#define WORDPROS_PREDICTOR_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "wordpros/distributions.h"
#include "wordpros/nn.h"

namespace wordpros {

// ---- contextual embeddings -------------------------------------------------

struct ContextEmbeddings {
  Matrix tokens;                   // N_tokens x D_ctx
  std::vector<int> token_to_word;  // non-decreasing, onto [0, W)

  int n_words() const { return token_to_word.empty() ? 0 : token_to_word.back() + 1; }
  /// Throws std::invalid_argument if a word has no token or the map is not
  /// monotone or does not match the token count.
  void validate() const;
};

class ContextEmbedder {
 public:
  virtual ~ContextEmbedder() = default;
  virtual ContextEmbeddings embed(const std::string& text) const = 0;
  virtual Index dim() const = 0;
  /// Short identifier recorded in checkpoints.
  virtual std::string name() const = 0;
};

/// Deterministic stand-in for a pretrained contextual model. Words are split
/// on whitespace and then into pieces of at most four characters ("##"
/// prefixes continuation pieces). Each piece gets a vector seeded by a hash
/// of its string, mixed with its neighbours, plus positional channels
/// (first word, last word, relative position, continuation piece).
class HashContextEmbedder : public ContextEmbedder {
 public:
  static constexpr Index kPositionChannels = 4;

  explicit HashContextEmbedder(Index hash_dim = 28, std::uint64_t seed = 7);

  ContextEmbeddings embed(const std::string& text) const override;
  Index dim() const override { return hash_dim_ + kPositionChannels; }
  std::string name() const override;

  static std::vector<std::string> word_pieces(const std::string& word);

 private:
  Matrix piece_vector(const std::string& piece) const;
  Index hash_dim_;
  std::uint64_t seed_;
};

/// Adapter for embeddings computed offline by an external model. The file is
/// JSONL, one object per sentence:
///   {"text": "...", "tokens": [[...], ...], "token_to_word": [0, 0, 1, ...]}
class PrecomputedEmbedder : public ContextEmbedder {
 public:
  explicit PrecomputedEmbedder(const std::filesystem::path& file);

  ContextEmbeddings embed(const std::string& text) const override;
  Index dim() const override { return dim_; }
  std::string name() const override { return "precomputed:" + source_; }

 private:
  std::map<std::string, ContextEmbeddings> table_;
  Index dim_ = 0;
  std::string source_;
};

/// Embeds `text` and checks that it yields exactly `expected_words` words.
ContextEmbeddings embed_context(const std::string& text, const ContextEmbedder& embedder,
                                int expected_words);

/// W x D_ctx: mean of the token rows belonging to each word.
Matrix pool_to_words(const ContextEmbeddings& ce);

// ---- predictor -------------------------------------------------------------

struct PredictorConfig {
  Index context_dim = 32;
  Index speaker_dim = 16;
  Index projection_dim = 32;
  Index lstm_hidden = 32;
  Index acoustic_latent_dim = 8;  // H
  Index duration_latent_dim = 4;  // H^D

  void validate() const;
};

struct ProsodyPrediction {
  dist::DiagGaussianSeq acoustic;  // W x H
  dist::DiagGaussianSeq duration;  // W x H^D
};

/// Inputs for a padded batch: each utterance's pooled word embeddings and its
/// (frozen) speaker embedding.
struct PredictorBatch {
  std::vector<Matrix> words;     // W_b x D_ctx
  std::vector<Matrix> speakers;  // 1 x E
  int max_words() const;
};

/// Tape outputs stacked step-major: row t * B + b is word t of utterance b.
/// Rows past an utterance's length are padding.
struct PredictorOutputs {
  ad::Var acoustic_mean, acoustic_var, duration_mean, duration_var;
  int batch = 0;
  int steps = 0;
  std::vector<int> lengths;  // words per utterance
};

class ProsodyPredictor {
 public:
  ProsodyPredictor(const PredictorConfig& config, nn::Rng& rng);

  const PredictorConfig& config() const { return config_; }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }

  PredictorOutputs forward(ad::Tape& tape, const PredictorBatch& batch) const;
  ProsodyPrediction predict_prosody(const Matrix& word_embs, const Matrix& speaker) const;

 private:
  PredictorConfig config_;
  nn::ParamStore store_;
  nn::Linear projection_;
  // Heads in order: acoustic mean, acoustic log-variance, duration mean,
  // duration log-variance.
  std::array<nn::Lstm, 4> lstm_;
  std::array<nn::Linear, 4> out_;
};

/// Sum over words of KL(pred acoustic || target acoustic) + KL(pred duration
/// || target duration).
double predictor_loss(const ProsodyPrediction& pred, const ProsodyPrediction& target);

// ---- Stage I posterior targets ---------------------------------------------

/// Stored in single precision so a file round trip is exact.
struct ProsodyTarget {
  std::string id;
  std::string speaker_id;
  MatrixF acoustic_mean, acoustic_var;  // W x H
  MatrixF duration_mean, duration_var;  // W x H^D

  int n_words() const { return static_cast<int>(acoustic_mean.rows()); }
  ProsodyPrediction as_prediction() const;
};

/// Batched loss over `targets` (aligned with batch.words). Padding rows are
/// masked out. Returns the 1 x 1 summed loss.
ad::Var predictor_loss(const PredictorOutputs& out, const std::vector<const ProsodyTarget*>& targets);

class ProsodyTargetStore {
 public:
  /// Throws std::invalid_argument on a duplicate id or bad record.
  void add(ProsodyTarget target);
  const ProsodyTarget* find(const std::string& id) const;
  const std::vector<ProsodyTarget>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  /// Record layout: one JSON header line {"id", "speaker_id", "W", "shapes"}
  /// followed by four little-endian float32 row-major matrices.
  void save(const std::filesystem::path& file) const;
  static ProsodyTargetStore load(const std::filesystem::path& file);

 private:
  std::vector<ProsodyTarget> records_;  // sorted by id
};

}  // namespace wordpros

#endif  // WORDPROS_PREDICTOR_H_
