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

#ifndef WORDPROS_ALIGNMENT_H_
#define WORDPROS_ALIGNMENT_H_

#include <span>
#include <string>
#include <vector>

#include "wordpros/autodiff.h"
#include "wordpros/corpus.h"

namespace wordpros {

/// Index maps between words, phonemes and frames for one utterance.
struct Alignment {
  std::vector<corpus::Span> word_spans;   // phoneme ranges
  std::vector<corpus::Span> word_frames;  // frame ranges
  std::vector<int> durations;
  std::vector<int> phoneme_to_word;
  std::vector<int> frame_to_phoneme;
  std::vector<int> frame_to_word;

  /// Throws std::invalid_argument if spans do not partition the phonemes or
  /// durations are negative. Zero-frame words are allowed here; encoders
  /// that pool over frames reject them.
  static Alignment build(std::vector<corpus::Span> word_spans, std::vector<int> durations);

  int n_words() const { return static_cast<int>(word_spans.size()); }
  int n_phonemes() const { return static_cast<int>(durations.size()); }
  int n_frames() const { return static_cast<int>(frame_to_phoneme.size()); }
  /// Throws std::invalid_argument naming the first word that owns no frame.
  void require_nonempty_words() const;
};

/// Row block i of the result is enc row i repeated durations[i] times.
Matrix upsample(const Matrix& enc, std::span<const int> durations);
ad::Var upsample(ad::Var enc, std::span<const int> durations);

/// Broadcasts a 1 x n row to `rows` rows.
ad::Var broadcast_row(ad::Var row, Index rows);

/// Corpus utterance mapped onto model indices.
struct Example {
  std::string id;
  int speaker = -1;
  std::vector<int> phoneme_ids;
  Alignment align;
  Matrix mel;
};

}  // namespace wordpros

#endif  // WORDPROS_ALIGNMENT_H_
