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


#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include <doctest.h>

#include "test_util.h"
#include "wordpros/evalkit.h"
#include "wordpros/pipeline.h"

using namespace wordpros;
using namespace wordpros::eval;
namespace fs = std::filesystem;

namespace {

// Two-pass textbook formula as an independent oracle.
double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("wordpros_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("pearson correlation") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (int c = 0; c < 1000; ++c) {
    std::vector<double> x(3 + c % 20), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = n01(rng);
      y[i] = (c % 3) * x[i] + n01(rng);
    }
    const Correlation r = pearson(x, y);
    REQUIRE(r.defined);
    REQUIRE(r.value >= -1.0);
    REQUIRE(r.value <= 1.0);
    REQUIRE(r.value == doctest::Approx(pearson_oracle(x, y)).epsilon(1e-12));
  }
  const std::vector<double> a{1, 2, 3}, flat{2, 2, 2};
  CHECK_FALSE(pearson(a, flat).defined);
  CHECK(pearson(a, a).value == doctest::Approx(1.0));
}

TEST_CASE("reconstruction metrics") {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{1, 1}, {1, 1}};
  const ReconMetrics m = recon_metrics(a, b);
  CHECK(m.mse == doctest::Approx((0.0 + 1 + 4 + 9) / 4));
  REQUIRE(m.per_band.size() == 2);
  CHECK(m.per_band[0] == doctest::Approx(2.0));
  CHECK(m.per_band[1] == doctest::Approx(5.0));
  CHECK(recon_metrics(a, a).mse == 0.0);
  CHECK_THROWS_AS(recon_metrics(a, Matrix(2, 3)), ShapeError);
}

TEST_CASE("word durations and energies") {
  const std::vector<int> d{2, 1, 3};
  const std::vector<corpus::Span> spans{{0, 2}, {2, 3}};
  CHECK(word_durations(d, spans) == std::vector<double>{3, 3});
  Matrix mel(6, 2);
  mel << 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6;
  const auto e = word_energies(mel, d, spans);
  CHECK(e[0] == doctest::Approx(2.0));
  CHECK(e[1] == doctest::Approx(5.0));
}

TEST_CASE("speaker probe separates separable data and not noise") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  const int K = 4, per = 120;
  Matrix x(K * per, 3), noise(K * per, 3);
  std::vector<int> labels;
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < per; ++i) {
      const int r = k * per + i;
      x.row(r) << 4.0 * (k == 1) + 0.3 * n01(rng), 4.0 * (k == 2) + 0.3 * n01(rng),
          4.0 * (k == 3) + 0.3 * n01(rng);
      noise.row(r) << n01(rng), n01(rng), n01(rng);
      labels.push_back(k);
    }
  }
  const ProbeResult good = speaker_probe(x, labels);
  CHECK(good.accuracy > 0.95);
  CHECK(good.chance == doctest::Approx(0.25));
  CHECK(good.n_classes == 4);
  CHECK(good.n_train + good.n_test == K * per);
  const ProbeResult bad = speaker_probe(noise, labels);
  CHECK(bad.accuracy < 0.4);
  CHECK(bad.accuracy >= 0.0);
  // Same seed, same split and answer.
  CHECK(speaker_probe(noise, labels).accuracy == bad.accuracy);

  std::vector<int> few(labels.begin(), labels.begin() + 150);
  CHECK_THROWS_AS(speaker_probe(x.topRows(150), few), ProbeDataError);
  std::vector<int> one_class(K * per, 0);
  CHECK_THROWS_AS(speaker_probe(x, one_class), ProbeDataError);
}

TEST_CASE("report json round trip and plots") {
  EvalReport r;
  r.speakers = {"a", "b"};
  r.config_fingerprint = "00ff";
  r.checkpoint_fingerprint = "abcd";
  Metric m;
  m.name = "fpt_duration_r";
  m.value = 0.5;
  m.count = 3;
  m.per_speaker = {{"a", 0.25}, {"b", 1.0}};
  m.samples = {{"a", {0.1, 0.4}}, {"b", {1.0}}};
  r.metrics.push_back(m);
  Metric u;
  u.name = "tts_mse";
  u.defined = false;
  u.count = 1;
  r.metrics.push_back(u);

  const EvalReport back = EvalReport::from_json(r.to_json());
  CHECK(back.to_json() == r.to_json());
  CHECK(r.to_json()["schema"] == "wordpros-eval-report/1");
  CHECK(back.find("tts_mse")->defined == false);
  CHECK(back.find("missing") == nullptr);

  const fs::path dir = temp_dir("report");
  CHECK(emit_report(r, dir / "rep.json", false).empty());
  CHECK(fs::exists(dir / "rep.json"));
  CHECK_FALSE(fs::exists(dir / "rep.fpt_duration_r.png"));
  const auto images = emit_report(r, dir / "rep.json", true);
  REQUIRE(images.size() == 1);
  std::ifstream png(images[0], std::ios::binary);
  unsigned char sig[8] = {};
  png.read(reinterpret_cast<char*>(sig), 8);
  CHECK(sig[1] == 'P');
  CHECK(sig[2] == 'N');
  CHECK(sig[3] == 'G');

  EvalReport empty = r;
  empty.metrics[0].count = 0;
  CHECK_THROWS_AS(emit_report(empty, dir / "bad.json", false), std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("transfer pairs cross speakers deterministically") {
  const corpus::Corpus c = corpus::generate_synthetic_corpus(testing::tiny_spec()).corpus;
  const auto p = transfer_pairs(c, 10, 4);
  REQUIRE(p.size() == 10);
  const auto q = transfer_pairs(c, 10, 4);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p[i].reference == q[i].reference);
    CHECK(c.speaker_index(c.utterances[p[i].reference].speaker_id) != p[i].target);
  }
  const auto means = speaker_mean_phoneme_duration(c);
  CHECK(means.size() == 2);
  CHECK(means.at("spk00") < means.at("spk01"));  // rates 0.8 vs 1.4
}

TEST_CASE("prosody correlation of a recording with itself is perfect") {
  const corpus::Corpus c = corpus::generate_synthetic_corpus(testing::tiny_spec()).corpus;
  for (const auto& u : c.utterances) {
    if (u.n_words() < 3) continue;
    const ProsodyCorrelation pc = prosody_correlation(u, u.mel, u.durations, u.word_spans);
    if (pc.duration_r.defined) CHECK(pc.duration_r.value == doctest::Approx(1.0));
    CHECK(pc.energy_r.value == doctest::Approx(1.0));
  }
  const auto& u = c.utterances[0];
  const std::vector<corpus::Span> two{{0, 1}, {1, u.n_phonemes()}};
  CHECK_THROWS_AS(prosody_correlation(u, u.mel, u.durations, two), std::invalid_argument);
}
