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


#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>

#include <doctest.h>

#include "test_util.h"
#include "wordpros/corpus.h"

using namespace wordpros;
using namespace wordpros::corpus;
namespace fs = std::filesystem;

namespace {

Utterance small_utterance() {
  Utterance u;
  u.id = "u1";
  u.speaker_id = "s";
  u.text = "ab c";
  u.phonemes = {"a", "b", "c"};
  u.word_spans = build_word_spans({2, 1});
  u.durations = {2, 1, 3};
  u.mel = Matrix::Zero(6, 4);
  return u;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("wordpros_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("word spans from lengths") {
  const auto spans = build_word_spans({3, 1, 2});
  CHECK(spans == std::vector<Span>{{0, 3}, {3, 4}, {4, 6}});
  Utterance u = small_utterance();
  u.word_spans = build_word_spans({1, 1, 1});
  CHECK(u.word_lengths() == std::vector<int>{1, 1, 1});
  CHECK(u.phoneme_to_word() == std::vector<int>{0, 1, 2});
}

TEST_CASE("utterance validation names the rule") {
  Utterance u = small_utterance();
  validate(u);
  u.mel = Matrix::Zero(7, 4);  // sum(durations) = 6
  CHECK_THROWS_AS(validate(u), ValidationError);
  try {
    validate(u);
  } catch (const ValidationError& e) {
    CHECK(e.utterance_id() == "u1");
    CHECK(std::string(e.what()).find("duration") != std::string::npos);
  }
  u = small_utterance();
  u.durations = {0, 0, 6};  // first word owns no frame
  CHECK_THROWS_AS(validate(u), ValidationError);
  u = small_utterance();
  u.word_spans = {{0, 2}};
  CHECK_THROWS_AS(validate(u), ValidationError);
}

TEST_CASE("missing manifest is a load error naming the path") {
  const fs::path d = temp_dir("nothing");
  fs::create_directories(d);
  try {
    load_corpus(d);
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find(d.string()) != std::string::npos);
  }
  fs::remove_all(d);
}

TEST_CASE("generator is deterministic and serialises byte-identically") {
  const SynthSpec spec = testing::tiny_spec(7);
  const SyntheticCorpus a = generate_synthetic_corpus(spec);
  const SyntheticCorpus b = generate_synthetic_corpus(spec);
  REQUIRE(a.corpus.utterances.size() == b.corpus.utterances.size());
  for (std::size_t i = 0; i < a.corpus.utterances.size(); ++i) {
    CHECK(a.corpus.utterances[i].mel == b.corpus.utterances[i].mel);
    CHECK(a.corpus.utterances[i].durations == b.corpus.utterances[i].durations);
  }
  const fs::path da = temp_dir("gen_a"), db = temp_dir("gen_b");
  save_corpus(a.corpus, da, &a.truth);
  save_corpus(b.corpus, db, &b.truth);
  CHECK(slurp(da / "manifest.jsonl") == slurp(db / "manifest.jsonl"));
  CHECK(slurp(da / "prosody_truth.jsonl") == slurp(db / "prosody_truth.jsonl"));
  for (const auto& u : a.corpus.utterances) {
    CHECK(slurp(da / "mels" / (u.id + ".f32")) == slurp(db / "mels" / (u.id + ".f32")));
  }

  // Reload: identical utterances and a consistent sidecar.
  const Corpus back = load_corpus(da);
  REQUIRE(back.utterances.size() == a.corpus.utterances.size());
  for (std::size_t i = 0; i < back.utterances.size(); ++i) {
    const Utterance& x = back.utterances[i];
    const Utterance& y = a.corpus.utterances[i];
    CHECK(x.id == y.id);
    CHECK(x.mel == y.mel);
    CHECK(x.word_spans == y.word_spans);
    CHECK(x.phonemes == y.phonemes);
  }
  const ProsodyTruth truth = load_prosody_truth(da);
  CHECK(truth.by_utterance.size() == back.utterances.size());
  CHECK(truth.speaker_rate == a.truth.speaker_rate);
  fs::remove_all(da);
  fs::remove_all(db);
}

TEST_CASE("frames equal total duration across a generated corpus") {
  SynthSpec spec = testing::tiny_spec(9);
  spec.n_utterances = 60;
  for (const auto& u : generate_synthetic_corpus(spec).corpus.utterances) {
    int total = 0;
    for (int d : u.durations) total += d;
    REQUIRE(total == u.n_frames());
    for (const auto& s : u.word_frame_spans()) REQUIRE(s.second > s.first);
  }
}

TEST_CASE("speaker rate scales mean phoneme duration") {
  SynthSpec spec = testing::tiny_spec(11);
  spec.n_utterances = 200;
  spec.speaker_rates = {2.0, 1.0};
  spec.rate_log_std = 0;
  const SyntheticVoices voices(spec);
  const SyntheticCorpus sc = generate_synthetic_corpus(spec);
  // Oracle: the generator's own arithmetic, phoneme by phoneme.
  std::map<std::string, double> got_sum, want_sum, n;
  std::map<std::string, int> symbol_index;
  for (std::size_t i = 0; i < voices.phoneme_symbols().size(); ++i) {
    symbol_index[voices.phoneme_symbols()[i]] = static_cast<int>(i);
  }
  for (const auto& u : sc.corpus.utterances) {
    const int s = sc.corpus.speaker_index(u.speaker_id);
    for (int p = 0; p < u.n_phonemes(); ++p) {
      got_sum[u.speaker_id] += u.durations[p];
      want_sum[u.speaker_id] += voices.duration(symbol_index.at(u.phonemes[p]), s, 1.0);
      n[u.speaker_id] += 1;
    }
  }
  for (const auto& [spk, total] : got_sum) CHECK(total == want_sum[spk]);
  const double slow = got_sum["spk00"] / n["spk00"];
  const double fast = got_sum["spk01"] / n["spk01"];
  CHECK(slow / fast == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("zero-noise mels recover the recorded energy gains") {
  SynthSpec spec = testing::tiny_spec(13);
  spec.noise_level = 0;
  const SyntheticVoices voices(spec);
  const SyntheticCorpus sc = generate_synthetic_corpus(spec);
  std::map<std::string, int> symbol_index;
  for (std::size_t i = 0; i < voices.phoneme_symbols().size(); ++i) {
    symbol_index[voices.phoneme_symbols()[i]] = static_cast<int>(i);
  }
  for (const auto& u : sc.corpus.utterances) {
    const WordFactors& f = sc.truth.by_utterance.at(u.id);
    std::vector<int> ph;
    for (const auto& s : u.phonemes) ph.push_back(symbol_index.at(s));
    WordFactors unit = f;
    std::fill(unit.energy_gain.begin(), unit.energy_gain.end(), 1.0);
    const Matrix flat = voices.render(sc.corpus.speaker_index(u.speaker_id), ph, u.durations,
                                      u.phoneme_to_word(), unit);
    const auto frames = u.word_frame_spans();
    for (int w = 0; w < u.n_words(); ++w) {
      const Index a = frames[w].first, len = frames[w].second - frames[w].first;
      const double got = u.mel.middleRows(a, len).mean() / flat.middleRows(a, len).mean();
      CHECK(got == doctest::Approx(f.energy_gain[w]).epsilon(1e-5));
    }
  }
}

TEST_CASE("identical factors and phonemes render identical mels") {
  SynthSpec spec = testing::tiny_spec(15);
  const SyntheticVoices voices(spec);
  WordFactors f;
  f.energy_gain = {1.2, 0.8};
  f.pitch_offset = {0.5, -1.0};
  f.rate = {1.0, 1.0};
  const std::vector<int> ph{0, 1, 2};
  const std::vector<int> dur{2, 3, 1};
  const std::vector<int> word_of{0, 0, 1};
  CHECK(voices.render(0, ph, dur, word_of, f) == voices.render(0, ph, dur, word_of, f));
  CHECK(voices.render(0, ph, dur, word_of, f) != voices.render(1, ph, dur, word_of, f));
}

TEST_CASE("synth spec parsing and validation") {
  const SynthSpec s = parse_synth_spec(
      "n_speakers = 3\nn_utterances = 30\nspeaker_rates = 0.8, 1.0, 1.2\nseed = 5\n");
  CHECK(s.n_speakers == 3);
  CHECK(s.speaker_rates == std::vector<double>{0.8, 1.0, 1.2});
  CHECK(s.seed == 5u);
  SynthSpec bad = s;
  bad.speaker_rates = {1.0};
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}
