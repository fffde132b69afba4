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


// Shared helpers for the test binaries: finite-difference gradient checks
// and a small corpus/config pair that trains in milliseconds.

#ifndef WORDPROS_TESTS_TEST_UTIL_H_
#define WORDPROS_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "wordpros/alignment.h"
#include "wordpros/autodiff.h"
#include "wordpros/corpus.h"
#include "wordpros/model.h"
#include "wordpros/tensor.h"

namespace wordpros::testing {

struct GradCheck {
  std::string name;
  double rel_error = 0;
  double analytic_norm = 0;
  Index checked = 0;
};

/// Compares tape gradients with central differences, one entry per
/// parameter at a time. `loss` must record a 1 x 1 node and be a
/// deterministic function of the parameter values. At most `max_entries`
/// entries per parameter are probed (evenly strided).
inline std::vector<GradCheck> check_gradients(
    const std::function<ad::Var(ad::Tape&)>& loss,
    const std::vector<std::pair<std::string, std::vector<ad::Parameter*>>>& groups,
    double step = 1e-5, Index max_entries = 24) {
  ad::Gradients grads;
  {
    ad::Tape tape;
    tape.backward(loss(tape), grads);
  }
  auto eval = [&] {
    ad::Tape tape;
    return loss(tape).value()(0, 0);
  };
  std::vector<GradCheck> out;
  for (const auto& [name, params] : groups) {
    double diff2 = 0, a2 = 0, f2 = 0;
    Index checked = 0;
    for (ad::Parameter* p : params) {
      const Matrix* g = grads.find(p);
      const Index n = p->value.size();
      const Index stride = std::max<Index>(1, n / max_entries);
      for (Index i = 0; i < n; i += stride) {
        double& x = p->value.data()[i];
        const double saved = x;
        x = saved + step;
        const double up = eval();
        x = saved - step;
        const double down = eval();
        x = saved;
        const double fd = (up - down) / (2 * step);
        const double an = g != nullptr ? g->data()[i] : 0.0;
        diff2 += (an - fd) * (an - fd);
        a2 += an * an;
        f2 += fd * fd;
        ++checked;
      }
    }
    const double scale = std::max({std::sqrt(a2), std::sqrt(f2), 1e-8});
    out.push_back({name, std::sqrt(diff2) / scale, std::sqrt(a2), checked});
  }
  return out;
}

inline corpus::SynthSpec tiny_spec(std::uint64_t seed = 3) {
  corpus::SynthSpec s;
  s.n_speakers = 2;
  s.n_utterances = 6;
  s.words_per_utterance = {3, 5};
  s.phonemes_per_word = {1, 3};
  s.mel_bins = 8;
  s.n_phonemes = 6;
  s.vocabulary_size = 12;
  s.speaker_rates = {0.8, 1.4};
  s.seed = seed;
  return s;
}

inline RunConfig tiny_config() {
  RunConfig c;
  c.seed = 11;
  c.speaker_dim = 3;
  c.encoding_dim = 6;
  c.latent_dim = 2;
  c.encoder_layers = 1;
  c.encoder_kernel = 3;
  c.reference_width = 5;
  c.reference_layers = 1;
  c.reference_kernel = 3;
  c.decoder_width = 6;
  c.decoder_layers = 2;
  c.decoder_kernel = 3;
  c.duration_latent_dim = 2;
  c.duration_encoding_dim = 5;
  c.duration_reference_width = 4;
  c.duration_head_width = 5;
  c.duration_head_layers = 1;
  c.anneal = {0, 20};
  c.steps = 30;
  c.batch_size = 3;
  c.log_every = 10;
  c.projection_dim = 6;
  c.lstm_hidden = 5;
  c.hash_dim = 8;
  c.stage2_steps = 20;
  return c;
}

// Miniature problem: P = 4 phonemes in W = 2 words, T = 8 frames, M = 8
// mel bins, latent width 2.
inline Example mini_example(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Example ex;
  ex.id = "mini";
  ex.speaker = 1;
  ex.phoneme_ids = {0, 3, 2, 4};
  ex.align = Alignment::build({{0, 2}, {2, 4}}, {1, 3, 2, 2});
  ex.mel.resize(8, 8);
  for (Index i = 0; i < ex.mel.size(); ++i) ex.mel.data()[i] = 0.5 * n01(rng);
  return ex;
}

inline AcousticConfig mini_acoustic_config() {
  AcousticConfig c;
  c.n_phonemes = 5;
  c.mel_bins = 8;
  c.speaker_dim = 3;
  c.encoding_dim = 4;
  c.latent_dim = 2;
  c.encoder_layers = 1;
  c.encoder_kernel = 3;
  c.reference_width = 4;
  c.reference_layers = 1;
  c.reference_kernel = 3;
  c.decoder_width = 5;
  c.decoder_layers = 2;
  c.decoder_kernel = 3;
  return c;
}

inline DurationConfig mini_duration_config() {
  DurationConfig c;
  c.n_phonemes = 5;
  c.mel_bins = 8;
  c.speaker_dim = 3;
  c.encoding_dim = 4;
  c.latent_dim = 2;
  c.encoder_layers = 1;
  c.encoder_kernel = 3;
  c.reference_width = 4;
  c.reference_layers = 1;
  c.head_width = 4;
  c.head_layers = 1;
  return c;
}

inline Matrix normal_matrix(Index rows, Index cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = scale * n01(rng);
  return m;
}

}  // namespace wordpros::testing

#endif  // WORDPROS_TESTS_TEST_UTIL_H_
