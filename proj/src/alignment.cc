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

#include "wordpros/alignment.h"

#include <stdexcept>

namespace wordpros {

Alignment Alignment::build(std::vector<corpus::Span> word_spans, std::vector<int> durations) {
  Alignment a;
  const int P = static_cast<int>(durations.size());
  int expect = 0;
  for (const auto& [b, e] : word_spans) {
    if (b != expect || e <= b) throw std::invalid_argument("word spans do not partition phonemes");
    expect = e;
  }
  if (expect != P) {
    throw std::invalid_argument("word spans cover " + std::to_string(expect) + " phonemes, have " +
                                std::to_string(P) + " durations");
  }
  a.phoneme_to_word.assign(P, 0);
  int frame = 0;
  for (std::size_t w = 0; w < word_spans.size(); ++w) {
    const int start = frame;
    for (int p = word_spans[w].first; p < word_spans[w].second; ++p) {
      if (durations[p] < 0) throw std::invalid_argument("negative duration");
      a.phoneme_to_word[p] = static_cast<int>(w);
      for (int k = 0; k < durations[p]; ++k) {
        a.frame_to_phoneme.push_back(p);
        a.frame_to_word.push_back(static_cast<int>(w));
      }
      frame += durations[p];
    }
    a.word_frames.emplace_back(start, frame);
  }
  a.word_spans = std::move(word_spans);
  a.durations = std::move(durations);
  return a;
}

void Alignment::require_nonempty_words() const {
  for (std::size_t w = 0; w < word_frames.size(); ++w) {
    if (word_frames[w].second <= word_frames[w].first) {
      throw std::invalid_argument("word " + std::to_string(w) + " has zero frames");
    }
  }
}

Matrix upsample(const Matrix& enc, std::span<const int> durations) {
  if (static_cast<Index>(durations.size()) != enc.rows()) {
    throw ShapeError("upsample: " + std::to_string(durations.size()) + " durations for " +
                     std::to_string(enc.rows()) + " encodings");
  }
  Index T = 0;
  for (int d : durations) {
    if (d < 0) throw std::invalid_argument("upsample: negative duration");
    T += d;
  }
  Matrix out(T, enc.cols());
  Index t = 0;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    for (int k = 0; k < durations[i]; ++k) out.row(t++) = enc.row(static_cast<Index>(i));
  }
  return out;
}

ad::Var upsample(ad::Var enc, std::span<const int> durations) {
  if (static_cast<Index>(durations.size()) != enc.rows()) {
    throw ShapeError("upsample: " + std::to_string(durations.size()) + " durations for " +
                     std::to_string(enc.rows()) + " encodings");
  }
  std::vector<int> idx;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    if (durations[i] < 0) throw std::invalid_argument("upsample: negative duration");
    idx.insert(idx.end(), durations[i], static_cast<int>(i));
  }
  return ad::gather_rows(enc, idx);
}

ad::Var broadcast_row(ad::Var row, Index rows) {
  const std::vector<int> idx(static_cast<std::size_t>(rows), 0);
  return ad::gather_rows(row, idx);
}

}  // namespace wordpros
