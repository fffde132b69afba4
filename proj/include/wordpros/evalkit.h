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

// Objective metrics: reconstruction error, per-word prosody correlation,
// a linear speaker probe, and JSON reports with optional box plots.
// The report schema is described in docs/report.md.

#ifndef WORDPROS_EVALKIT_H_
#define WORDPROS_EVALKIT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wordpros/corpus.h"
#include "wordpros/tensor.h"

namespace wordpros {
class Model;
class ContextEmbedder;
}  // namespace wordpros

namespace wordpros::eval {

struct ReconMetrics {
  double mse = 0;
  std::vector<double> per_band;  // mean over frames, one per mel bin
};

/// Throws ShapeError unless shapes match and are non-empty.
ReconMetrics recon_metrics(const Matrix& pred, const Matrix& ref);

/// A correlation that is undefined when either side has zero variance.
struct Correlation {
  double value = 0;
  bool defined = false;
};

Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Frames per word.
std::vector<double> word_durations(std::span<const int> durations,
                                   std::span<const corpus::Span> word_spans);
/// Mean mel value over each word's frames.
std::vector<double> word_energies(const Matrix& mel, std::span<const int> durations,
                                  std::span<const corpus::Span> word_spans);

struct ProsodyCorrelation {
  Correlation duration_r;
  Correlation energy_r;
};

/// Correlates per-word durations and energies of a reference recording with
/// a generated rendition of the same words. Throws std::invalid_argument for
/// fewer than three words or inconsistent inputs.
ProsodyCorrelation prosody_correlation(const corpus::Utterance& reference, const Matrix& gen_mel,
                                       std::span<const int> gen_durations,
                                       std::span<const corpus::Span> word_spans);

class ProbeDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ProbeOptions {
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
  double l2 = 1e-3;
  int iterations = 500;
  double learning_rate = 0.5;
  int min_per_class = 100;
};

struct ProbeResult {
  double accuracy = 0;
  double chance = 0;
  int n_classes = 0;
  int n_train = 0;
  int n_test = 0;
  std::vector<double> per_class_accuracy;  // held-out recall per label
};

/// Multinomial logistic regression on standardised rows of `features`,
/// trained by full-batch gradient descent on a seeded, per-class 80/20
/// split, scored on the held-out rows. Labels must lie in [0, K) with K >= 2
/// and at least min_per_class rows each; otherwise ProbeDataError.
ProbeResult speaker_probe(const Matrix& features, std::span<const int> labels,
                          const ProbeOptions& options = {});

struct Metric {
  std::string name;
  double value = 0;
  bool defined = true;
  std::size_t count = 0;
  std::map<std::string, double> per_speaker;
  /// Raw per-item values by speaker, used for plots; not serialised.
  std::map<std::string, std::vector<double>> samples;
};

struct EvalReport {
  std::vector<Metric> metrics;
  std::vector<std::string> speakers;
  std::string config_fingerprint;
  std::string checkpoint_fingerprint;

  const Metric* find(const std::string& name) const;
  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

/// Writes the JSON report; with `plots`, also one box-plot PNG per metric
/// that has samples, named <report stem>.<metric>.png beside the report.
/// Throws std::invalid_argument if any metric has a zero sample count and
/// std::runtime_error if the path is not writable. Returns the image paths.
std::vector<std::filesystem::path> emit_report(const EvalReport& report,
                                               const std::filesystem::path& path, bool plots);

/// Writes a box plot (one box per group, in map order) as an RGB PNG.
void write_box_plot(const std::map<std::string, std::vector<double>>& groups,
                    const std::filesystem::path& file);

struct EvalOptions {
  int fpt_pairs = 40;
  std::uint64_t seed = 1;
  ProbeOptions probe;
};

/// Transfer pair: reference utterance index and target speaker index.
struct TransferPair {
  int reference = 0;
  int target = 0;
};

/// Cross-speaker pairs: target speakers cycle through the speaker list and
/// references are drawn (seeded) from the other speakers' utterances.
std::vector<TransferPair> transfer_pairs(const corpus::Corpus& corpus, int n_pairs,
                                         std::uint64_t seed);

/// Mean frames per phoneme of each speaker's utterances.
std::map<std::string, double> speaker_mean_phoneme_duration(const corpus::Corpus& corpus);

/// Full evaluation of a trained model on a corpus: copy-synthesis error,
/// TTS error (when a predictor and embedder are available), cross-speaker
/// transfer correlations and target-rate agreement, and speaker probes on
/// word-level latent means with the speaker-embedding control.
EvalReport evaluate(const Model& model, const corpus::Corpus& corpus,
                    const ContextEmbedder* embedder, const EvalOptions& options = {});

}  // namespace wordpros::eval

#endif  // WORDPROS_EVALKIT_H_
