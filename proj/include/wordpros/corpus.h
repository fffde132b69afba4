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

// Utterances, corpora on disk, and the synthetic multi-speaker generator.
//
// On-disk layout of a corpus directory:
//   manifest.jsonl      one JSON object per utterance (id, speaker_id, text,
//                       phonemes, word_lengths, durations, mel_file,
//                       n_frames, n_bins)
//   <mel_file>          raw little-endian float32, row-major (frame, bin)
//   prosody_truth.jsonl optional; per-word generator factors, synthetic only

#ifndef WORDPROS_CORPUS_H_
#define WORDPROS_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wordpros/tensor.h"

namespace wordpros::corpus {

using Span = std::pair<int, int>;  // half-open [first, second)

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& utterance_id, const std::string& rule)
      : std::runtime_error("utterance '" + utterance_id + "': " + rule),
        utterance_id_(utterance_id) {}
  const std::string& utterance_id() const { return utterance_id_; }

 private:
  std::string utterance_id_;
};

struct Utterance {
  std::string id;
  std::string speaker_id;
  std::string text;
  std::vector<std::string> phonemes;
  std::vector<Span> word_spans;  // over phoneme indices
  std::vector<int> durations;    // frames per phoneme
  Matrix mel;                    // n_frames x n_bins

  int n_phonemes() const { return static_cast<int>(phonemes.size()); }
  int n_words() const { return static_cast<int>(word_spans.size()); }
  int n_frames() const { return static_cast<int>(mel.rows()); }
  std::vector<int> word_lengths() const;
  /// Frame range of every word, derived from durations.
  std::vector<Span> word_frame_spans() const;
  std::vector<int> phoneme_to_word() const;
  std::vector<int> frame_to_word() const;
};

/// Throws ValidationError naming the first violated rule.
void validate(const Utterance& u);

struct Corpus {
  std::vector<Utterance> utterances;      // sorted by id
  std::vector<std::string> speakers;      // sorted, distinct
  std::vector<std::string> phoneme_inventory;  // sorted, distinct

  const Utterance* find(const std::string& id) const;
  int speaker_index(const std::string& speaker_id) const;  // -1 if unknown
};

/// Sorts utterances by id and derives the speaker list and phoneme inventory.
Corpus make_corpus(std::vector<Utterance> utterances);

/// Contiguous spans for words with the given phoneme counts.
std::vector<Span> build_word_spans(const std::vector<int>& word_lengths);

Corpus load_corpus(const std::filesystem::path& dir);

/// Ground-truth per-word factors recorded by the synthetic generator.
struct WordFactors {
  std::vector<double> energy_gain;
  std::vector<double> pitch_offset;  // in mel bins
  std::vector<double> rate;          // duration multiplier
};

struct ProsodyTruth {
  std::map<std::string, WordFactors> by_utterance;
  std::map<std::string, double> speaker_rate;
};

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir,
                 const ProsodyTruth* truth = nullptr);
ProsodyTruth load_prosody_truth(const std::filesystem::path& dir);

/// Raw float32 mel files shared by the corpus and inference outputs.
void write_mel_f32(const Matrix& mel, const std::filesystem::path& file);
Matrix read_mel_f32(const std::filesystem::path& file, Index n_frames, Index n_bins);

// ---- synthetic generator ----------------------------------------------------

struct IntRange {
  int min = 1;
  int max = 1;
};

struct SynthSpec {
  int n_speakers = 4;
  int n_utterances = 40;  // assigned to speakers round-robin
  IntRange words_per_utterance{3, 7};
  IntRange phonemes_per_word{1, 4};
  int mel_bins = 80;
  int n_phonemes = 24;  // excluding the silence phoneme
  int vocabulary_size = 60;

  /// Per-speaker tempo; empty means drawn from [0.7, 1.5].
  std::vector<double> speaker_rates;
  double timbre_scale = 0.6;
  double base_duration_min = 2.5;  // frames at rate 1
  double base_duration_max = 5.5;

  /// Per-word latent prosody: log-gain, pitch offset (bins), log-rate.
  double energy_log_std = 0.25;
  double pitch_offset_std = 1.5;
  double rate_log_std = 0.25;
  /// Fraction of each factor's variance explained by word identity and
  /// sentence position; the rest is free per-word variation.
  double context_fraction = 0.5;
  /// When non-empty, word rates are drawn uniformly from this set instead.
  std::vector<double> word_rate_choices;

  double pause_probability = 0.15;  // silence after a non-final word
  bool final_silence = true;
  double noise_level = 0.05;
  std::uint64_t seed = 1;
};

/// Throws std::invalid_argument when counts, ranges or rates are invalid.
void validate(const SynthSpec& spec);

/// Fixed voice material derived from a spec's seed: speaker timbres, phoneme
/// signatures, base durations and the word vocabulary.
class SyntheticVoices {
 public:
  explicit SyntheticVoices(const SynthSpec& spec);

  struct Word {
    std::string text;
    std::vector<int> phonemes;  // indices into phoneme_symbols()
    double energy_z = 0, pitch_z = 0, rate_z = 0;
  };

  const std::vector<std::string>& phoneme_symbols() const { return symbols_; }
  int silence_index() const { return static_cast<int>(symbols_.size()) - 1; }
  const std::vector<Word>& vocabulary() const { return vocab_; }
  double speaker_rate(int s) const { return speaker_rate_[s]; }
  double base_duration(int phoneme) const { return base_duration_[phoneme]; }

  /// Duration in frames of one phoneme: round-half-away of base * rates, >= 1.
  int duration(int phoneme, int speaker, double word_rate) const;

  /// Renders noiseless frames for a phoneme sequence. `word_of` maps each
  /// phoneme to its word; factors are per word.
  Matrix render(int speaker, const std::vector<int>& phonemes, const std::vector<int>& durations,
                const std::vector<int>& word_of, const WordFactors& factors) const;

 private:
  SynthSpec spec_;
  std::vector<std::string> symbols_;
  std::vector<Matrix> signature_;  // 1 x bins per phoneme
  std::vector<double> base_duration_;
  std::vector<Matrix> timbre_;     // 1 x bins per speaker
  std::vector<double> pitch_centre_;
  std::vector<double> speaker_rate_;
  std::vector<Word> vocab_;
};

struct SyntheticCorpus {
  Corpus corpus;
  ProsodyTruth truth;
};

SyntheticCorpus generate_synthetic_corpus(const SynthSpec& spec);

/// Parses the key = value spec format (see docs/formats.md).
SynthSpec parse_synth_spec(const std::string& text);
SynthSpec load_synth_spec(const std::filesystem::path& file);

}  // namespace wordpros::corpus

#endif  // WORDPROS_CORPUS_H_
