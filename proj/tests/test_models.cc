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
#include <random>
#include <vector>

#include <doctest.h>

#include "test_util.h"
#include "wordpros/acoustic.h"
#include "wordpros/distributions.h"
#include "wordpros/duration.h"
#include "wordpros/kvconfig.h"

using namespace wordpros;
using namespace wordpros::testing;

TEST_CASE("acoustic loss gradients match finite differences") {
  nn::Rng rng(4);
  SpeakerTable speakers(2, 3, rng);
  AcousticModel model(mini_acoustic_config(), rng);
  const Example ex = mini_example(1);
  const Matrix noise = normal_matrix(2, 2, 2);
  auto loss = [&](ad::Tape& t) {
    return acoustic_loss(t, model, speakers, ex, 0.7, noise, {0.5}).total;
  };
  const auto checks = check_gradients(loss, {{"speakers", speakers.params().all()},
                                             {"decoder", model.decoder_params().all()},
                                             {"reference", model.reference_params().all()}});
  for (const auto& c : checks) {
    INFO(c.name << " rel " << c.rel_error);
    CHECK(c.analytic_norm > 0);
    CHECK(c.rel_error < 1e-3);
  }
}

TEST_CASE("duration loss gradients match finite differences") {
  nn::Rng rng(5);
  SpeakerTable speakers(2, 3, rng);
  DurationModel model(mini_duration_config(), rng);
  const Example ex = mini_example(3);
  const Matrix noise = normal_matrix(2, 2, 4);
  auto loss = [&](ad::Tape& t) {
    return duration_loss(t, model, speakers, ex, 0.4, noise, {0.1}).total;
  };
  const auto checks = check_gradients(loss, {{"speakers", speakers.params().all()},
                                             {"head", model.head_params().all()},
                                             {"reference", model.reference_params().all()}});
  for (const auto& c : checks) {
    INFO(c.name << " rel " << c.rel_error);
    CHECK(c.analytic_norm > 0);
    CHECK(c.rel_error < 1e-3);
  }
}

TEST_CASE("loss composition and alpha zero") {
  nn::Rng rng(6);
  SpeakerTable speakers(2, 3, rng);
  AcousticModel acoustic(mini_acoustic_config(), rng);
  DurationModel duration(mini_duration_config(), rng);
  std::mt19937_64 r(7);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int c = 0; c < 200; ++c) {
    const Example ex = mini_example(100 + c);
    const double alpha = c == 0 ? 0.0 : unit(r);
    const Matrix noise = normal_matrix(2, 2, 300 + c);
    ad::Tape t;
    const LossValue a = acoustic_loss(t, acoustic, speakers, ex, alpha, noise, {1.0});
    const LossValue d = duration_loss(t, duration, speakers, ex, alpha, noise, {0.01});
    REQUIRE(a.total_value - a.recon - alpha * a.kl == doctest::Approx(0).scale(1e-9));
    REQUIRE(d.total_value - d.recon - alpha * d.kl == doctest::Approx(0).scale(1e-9));
    REQUIRE(a.kl >= 0);
    REQUIRE(d.kl >= 0);
    if (alpha == 0.0) {
      CHECK(a.total_value == a.recon);
      CHECK(d.total_value == d.recon);
    }
  }
}

TEST_CASE("recon term is the scaled mean squared error") {
  nn::Rng rng(8);
  SpeakerTable speakers(2, 3, rng);
  AcousticModel model(mini_acoustic_config(), rng);
  const Example ex = mini_example(9);
  ad::Tape t;
  const LossValue l = acoustic_loss(t, model, speakers, ex, 1.0, Matrix::Zero(2, 2), {0.25});
  CHECK(l.recon == doctest::Approx(64 * l.recon_mse / (2 * 0.25)));
  // Zero noise decodes the posterior mean; the plain path must agree.
  const Matrix enc = model.encode_phonemes(ex.phoneme_ids);
  const Matrix up = upsample(enc, ex.align.durations);
  const Matrix spk = speakers.embedding(ex.speaker);
  const auto post = model.encode_acoustic_reference(ex.mel, enc, spk, ex.align);
  const Matrix mel = model.decode_mel(up, post.mean, spk, ex.align);
  CHECK(dist::recon_nll(mel, ex.mel) == doctest::Approx(l.recon_mse).epsilon(1e-12));
}

TEST_CASE("posterior variances and predicted durations stay positive") {
  std::mt19937_64 r(10);
  std::normal_distribution<double> n01;
  for (int c = 0; c < 50; ++c) {
    nn::Rng rng(c);
    SpeakerTable speakers(2, 3, rng);
    AcousticModel acoustic(mini_acoustic_config(), rng);
    DurationModel duration(mini_duration_config(), rng);
    Example ex = mini_example(c);
    ex.mel *= 1 + 20 * std::abs(n01(r));
    const Matrix spk = speakers.embedding(c % 2);
    const Matrix enc = acoustic.encode_phonemes(ex.phoneme_ids);
    const auto a = acoustic.encode_acoustic_reference(ex.mel, enc, spk, ex.align);
    const auto d = duration.encode_duration_reference(
        ex.mel, duration.encode_phonemes(ex.phoneme_ids), spk, ex.align);
    REQUIRE((a.var.array() > 0).all());
    REQUIRE((d.var.array() > 0).all());
    const Matrix z = normal_matrix(2, 2, 50 + c, 10.0);
    for (double v : duration.predict_durations(ex.phoneme_ids, spk, z, ex.align.word_spans)) {
      REQUIRE(v > 0);
      REQUIRE(std::isfinite(v));
    }
  }
}

TEST_CASE("decoded frames only see nearby words") {
  nn::Rng rng(12);
  SpeakerTable speakers(2, 3, rng);
  AcousticModel model(mini_acoustic_config(), rng);
  const Example ex = mini_example(13);
  const Matrix enc = model.encode_phonemes(ex.phoneme_ids);
  const Matrix up = upsample(enc, ex.align.durations);
  const Matrix spk = speakers.embedding(0);
  Matrix z = normal_matrix(2, 2, 14);
  const Matrix base = model.decode_mel(up, z, spk, ex.align);
  CHECK(base.rows() == 8);
  CHECK(base.cols() == 8);
  z(1, 0) += 1.0;  // word 1 owns frames 4..7
  const Matrix moved = model.decode_mel(up, z, spk, ex.align);
  const int radius = model.decoder_receptive_radius();
  for (int t = 0; t < 4 - radius; ++t) CHECK(moved.row(t) == base.row(t));
  CHECK(moved.row(7) != base.row(7));
}

TEST_CASE("shape errors") {
  nn::Rng rng(15);
  SpeakerTable speakers(2, 3, rng);
  DurationModel duration(mini_duration_config(), rng);
  const Example ex = mini_example(16);
  const Matrix spk = speakers.embedding(0);
  CHECK_THROWS_AS(duration.predict_durations(ex.phoneme_ids, spk, Matrix::Zero(3, 2),
                                             ex.align.word_spans),
                  ShapeError);
  CHECK_THROWS_AS(speakers.embedding(2), std::out_of_range);
  AcousticConfig bad = mini_acoustic_config();
  bad.decoder_kernel = 4;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("duration quantisation") {
  CHECK(quantize_durations(std::vector<double>{0.2}) == std::vector<int>{1});
  CHECK(quantize_durations(std::vector<double>{2.5}) == std::vector<int>{3});
  CHECK(quantize_durations(std::vector<double>{2.49, 3.5, 7.0}) == std::vector<int>{2, 4, 7});
  CHECK_THROWS_AS(quantize_durations(std::vector<double>{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(quantize_durations(std::vector<double>{std::nan("")}), std::invalid_argument);
}

TEST_CASE("upsampled length equals total duration") {
  std::mt19937_64 r(17);
  std::uniform_int_distribution<int> len(1, 12), dur(0, 9);
  for (int c = 0; c < 1000; ++c) {
    std::vector<int> d(len(r));
    int total = 0;
    for (int& x : d) total += (x = dur(r));
    const Matrix up = upsample(Matrix::Ones(static_cast<Index>(d.size()), 2), d);
    REQUIRE(up.rows() == total);
  }
}

TEST_CASE("run config text round trip") {
  RunConfig c = tiny_config();
  c.corpus = "/data/corpus";
  c.stage2_lr_schedule = "cosine";
  const RunConfig back = RunConfig::parse(c.to_text());
  CHECK(back.to_text() == c.to_text());
  CHECK(back.fingerprint() == c.fingerprint());
  CHECK_THROWS_AS(RunConfig::parse("latent_dim = 0\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("no_such_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("anneal_start = 10\nanneal_end = 5\n"), ConfigError);
}

TEST_CASE("stage two settings must agree on stage one fields") {
  const RunConfig base = tiny_config();
  RunConfig other = base;
  other.stage2_steps = 77;
  other.lstm_hidden = 9;
  other.steps = 1;  // Stage I optimisation fields may differ
  const RunConfig merged = base.with_stage2_settings(other);
  CHECK(merged.stage2_steps == 77);
  CHECK(merged.lstm_hidden == 9);
  CHECK(merged.steps == base.steps);
  other.latent_dim = base.latent_dim + 1;
  CHECK_THROWS_AS(base.with_stage2_settings(other), ConfigError);
}
