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

#include "wordpros/predictor.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "wordpros/binio.h"

namespace wordpros {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

}  // namespace

void ContextEmbeddings::validate() const {
  if (static_cast<Index>(token_to_word.size()) != tokens.rows()) {
    throw std::invalid_argument("context embeddings: " + std::to_string(token_to_word.size()) +
                                " word indices for " + std::to_string(tokens.rows()) + " tokens");
  }
  int expect = 0;
  for (int w : token_to_word) {
    if (w == expect) {
      ++expect;
    } else if (w != expect - 1) {
      throw std::invalid_argument("context embeddings: token_to_word must be non-decreasing and "
                                  "give every word at least one token");
    }
  }
}

HashContextEmbedder::HashContextEmbedder(Index hash_dim, std::uint64_t seed)
    : hash_dim_(hash_dim), seed_(seed) {
  if (hash_dim < 1) throw std::invalid_argument("hash embedder dimension must be positive");
}

std::string HashContextEmbedder::name() const {
  return "hash:" + std::to_string(hash_dim_) + ":" + std::to_string(seed_);
}

std::vector<std::string> HashContextEmbedder::word_pieces(const std::string& word) {
  std::vector<std::string> pieces;
  for (std::size_t i = 0; i < word.size(); i += 4) {
    pieces.push_back((i == 0 ? "" : "##") + word.substr(i, 4));
  }
  return pieces;
}

Matrix HashContextEmbedder::piece_vector(const std::string& piece) const {
  nn::Rng rng(fnv1a(piece.data(), piece.size()) ^ seed_);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix v(1, hash_dim_);
  for (Index i = 0; i < hash_dim_; ++i) v(0, i) = normal(rng);
  return v;
}

ContextEmbeddings HashContextEmbedder::embed(const std::string& text) const {
  const auto words = split_words(text);
  std::vector<std::string> pieces;
  std::vector<int> word_of;
  std::vector<bool> continuation;
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto wp = word_pieces(words[w]);
    for (std::size_t k = 0; k < wp.size(); ++k) {
      pieces.push_back(wp[k]);
      word_of.push_back(static_cast<int>(w));
      continuation.push_back(k > 0);
    }
  }
  const Index n = static_cast<Index>(pieces.size());
  Matrix base(n, hash_dim_);
  for (Index i = 0; i < n; ++i) base.row(i) = piece_vector(pieces[i]);

  ContextEmbeddings ce;
  ce.tokens = Matrix::Zero(n, dim());
  const double W = static_cast<double>(words.size());
  for (Index i = 0; i < n; ++i) {
    auto row = ce.tokens.row(i);
    row.head(hash_dim_) = base.row(i);
    if (i > 0) row.head(hash_dim_) += 0.5 * base.row(i - 1);
    if (i + 1 < n) row.head(hash_dim_) += 0.5 * base.row(i + 1);
    const int w = word_of[i];
    row(hash_dim_) = w == 0 ? 1.0 : 0.0;
    row(hash_dim_ + 1) = w + 1 == static_cast<int>(W) ? 1.0 : 0.0;
    row(hash_dim_ + 2) = W > 1 ? w / (W - 1) : 0.0;
    row(hash_dim_ + 3) = continuation[i] ? 1.0 : 0.0;
  }
  ce.token_to_word = std::move(word_of);
  return ce;
}

PrecomputedEmbedder::PrecomputedEmbedder(const fs::path& file) : source_(file.filename().string()) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open embedding file " + file.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto rows = j.at("tokens").get<std::vector<std::vector<double>>>();
      ContextEmbeddings ce;
      ce.token_to_word = j.at("token_to_word").get<std::vector<int>>();
      if (rows.empty()) throw std::invalid_argument("no tokens");
      const Index d = static_cast<Index>(rows[0].size());
      if (dim_ == 0) dim_ = d;
      ce.tokens.resize(static_cast<Index>(rows.size()), d);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<Index>(rows[r].size()) != dim_) throw std::invalid_argument("ragged tokens");
        for (Index c = 0; c < d; ++c) ce.tokens(static_cast<Index>(r), c) = rows[r][c];
      }
      ce.validate();
      table_[j.at("text").get<std::string>()] = std::move(ce);
    } catch (const std::exception& e) {
      throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

ContextEmbeddings PrecomputedEmbedder::embed(const std::string& text) const {
  auto it = table_.find(text);
  if (it == table_.end()) throw std::out_of_range("no precomputed embeddings for \"" + text + "\"");
  return it->second;
}

ContextEmbeddings embed_context(const std::string& text, const ContextEmbedder& embedder,
                                int expected_words) {
  ContextEmbeddings ce = embedder.embed(text);
  ce.validate();
  if (ce.n_words() != expected_words) {
    throw std::invalid_argument("text \"" + text + "\" has " + std::to_string(ce.n_words()) +
                                " words but the utterance has " + std::to_string(expected_words));
  }
  return ce;
}

Matrix pool_to_words(const ContextEmbeddings& ce) {
  ce.validate();
  Matrix out = Matrix::Zero(ce.n_words(), ce.tokens.cols());
  std::vector<int> count(static_cast<std::size_t>(ce.n_words()), 0);
  for (Index i = 0; i < ce.tokens.rows(); ++i) {
    out.row(ce.token_to_word[i]) += ce.tokens.row(i);
    ++count[ce.token_to_word[i]];
  }
  for (int w = 0; w < ce.n_words(); ++w) out.row(w) /= count[w];
  return out;
}

void PredictorConfig::validate() const {
  if (context_dim < 1 || speaker_dim < 1 || projection_dim < 1 || lstm_hidden < 1 ||
      acoustic_latent_dim < 1 || duration_latent_dim < 1) {
    throw std::invalid_argument("predictor config: all dimensions must be positive");
  }
}

int PredictorBatch::max_words() const {
  int m = 0;
  for (const auto& w : words) m = std::max(m, static_cast<int>(w.rows()));
  return m;
}

ProsodyPredictor::ProsodyPredictor(const PredictorConfig& config, nn::Rng& rng) : config_(config) {
  config_.validate();
  const auto& c = config_;
  projection_ = nn::Linear::create(store_, "predictor.projection", c.context_dim + c.speaker_dim,
                                   c.projection_dim, rng);
  static const char* kHeads[4] = {"acoustic_mean", "acoustic_logvar", "duration_mean",
                                  "duration_logvar"};
  for (int k = 0; k < 4; ++k) {
    const std::string name = std::string("predictor.") + kHeads[k];
    lstm_[k] = nn::Lstm::create(store_, name + ".lstm", c.projection_dim, c.lstm_hidden, rng);
    const Index width = k < 2 ? c.acoustic_latent_dim : c.duration_latent_dim;
    out_[k] = nn::Linear::create(store_, name + ".out", c.lstm_hidden, width, rng,
                                 k % 2 == 1 ? 0.1 : 1.0);
  }
}

PredictorOutputs ProsodyPredictor::forward(ad::Tape& tape, const PredictorBatch& batch) const {
  const int B = static_cast<int>(batch.words.size());
  if (B == 0 || static_cast<int>(batch.speakers.size()) != B) {
    throw std::invalid_argument("predictor batch: need one speaker row per utterance");
  }
  const Index D = config_.context_dim, E = config_.speaker_dim;
  const int T = batch.max_words();
  Matrix x = Matrix::Zero(static_cast<Index>(T) * B, D + E);
  for (int b = 0; b < B; ++b) {
    const Matrix& w = batch.words[b];
    const Matrix& s = batch.speakers[b];
    if (w.rows() < 1 || w.cols() != D) {
      throw ShapeError("predictor: word embeddings " + shape_str(w) + ", expected Wx" +
                       std::to_string(D));
    }
    if (s.rows() != 1 || s.cols() != E) {
      throw ShapeError("predictor: speaker embedding " + shape_str(s) + ", expected 1x" +
                       std::to_string(E));
    }
    for (int t = 0; t < T; ++t) {
      const Index r = static_cast<Index>(t) * B + b;
      if (t < w.rows()) x.row(r).head(D) = w.row(t);
      x.row(r).tail(E) = s;
    }
  }
  ad::Var proj = ad::tanh(projection_(tape, tape.constant(std::move(x))));
  std::vector<ad::Var> steps;
  steps.reserve(T);
  for (int t = 0; t < T; ++t) steps.push_back(ad::slice_rows(proj, static_cast<Index>(t) * B, B));

  std::array<ad::Var, 4> heads;
  for (int k = 0; k < 4; ++k) {
    const std::vector<ad::Var> hs = lstm_[k](tape, steps);
    heads[k] = out_[k](tape, ad::concat_rows(hs));
  }
  PredictorOutputs out;
  out.acoustic_mean = heads[0];
  out.acoustic_var = ad::exp(heads[1]);
  out.duration_mean = heads[2];
  out.duration_var = ad::exp(heads[3]);
  out.batch = B;
  out.steps = T;
  for (const auto& w : batch.words) out.lengths.push_back(static_cast<int>(w.rows()));
  return out;
}

ProsodyPrediction ProsodyPredictor::predict_prosody(const Matrix& word_embs,
                                                    const Matrix& speaker) const {
  ad::Tape tape;
  PredictorBatch batch{{word_embs}, {speaker}};
  const PredictorOutputs out = forward(tape, batch);
  return {{out.acoustic_mean.value(), out.acoustic_var.value()},
          {out.duration_mean.value(), out.duration_var.value()}};
}

double predictor_loss(const ProsodyPrediction& pred, const ProsodyPrediction& target) {
  if (pred.acoustic.words() != target.acoustic.words() ||
      pred.duration.words() != target.duration.words() ||
      pred.acoustic.words() != pred.duration.words()) {
    throw std::invalid_argument("predictor_loss: word counts differ (" +
                                std::to_string(pred.acoustic.words()) + " predicted, " +
                                std::to_string(target.acoustic.words()) + " target)");
  }
  return dist::kl_diag_gaussians(pred.acoustic, target.acoustic).sum() +
         dist::kl_diag_gaussians(pred.duration, target.duration).sum();
}

ProsodyPrediction ProsodyTarget::as_prediction() const {
  return {{acoustic_mean.cast<double>(), acoustic_var.cast<double>()},
          {duration_mean.cast<double>(), duration_var.cast<double>()}};
}

ad::Var predictor_loss(const PredictorOutputs& out,
                       const std::vector<const ProsodyTarget*>& targets) {
  if (static_cast<int>(targets.size()) != out.batch) {
    throw std::invalid_argument("predictor_loss: " + std::to_string(targets.size()) +
                                " targets for a batch of " + std::to_string(out.batch));
  }
  const Index rows = static_cast<Index>(out.steps) * out.batch;
  const Index H = out.acoustic_mean.cols(), HD = out.duration_mean.cols();
  Matrix am = Matrix::Zero(rows, H), av = Matrix::Ones(rows, H);
  Matrix dm = Matrix::Zero(rows, HD), dv = Matrix::Ones(rows, HD);
  Matrix mask = Matrix::Zero(rows, 1);
  for (int b = 0; b < out.batch; ++b) {
    const ProsodyTarget& tg = *targets[b];
    if (tg.n_words() != out.lengths[b]) {
      throw std::invalid_argument("predictor_loss: utterance '" + tg.id + "' has " +
                                  std::to_string(tg.n_words()) + " target words but " +
                                  std::to_string(out.lengths[b]) + " predicted");
    }
    if (tg.acoustic_mean.cols() != H || tg.duration_mean.cols() != HD) {
      throw ShapeError("predictor_loss: target widths for '" + tg.id + "' do not match model");
    }
    for (int t = 0; t < tg.n_words(); ++t) {
      const Index r = static_cast<Index>(t) * out.batch + b;
      am.row(r) = tg.acoustic_mean.row(t).cast<double>();
      av.row(r) = tg.acoustic_var.row(t).cast<double>();
      dm.row(r) = tg.duration_mean.row(t).cast<double>();
      dv.row(r) = tg.duration_var.row(t).cast<double>();
      mask(r, 0) = 1.0;
    }
  }
  ad::Tape& tape = *out.acoustic_mean.tape();
  ad::Var kl_a = dist::op::kl_diag_gaussians(out.acoustic_mean, out.acoustic_var,
                                             tape.constant(std::move(am)),
                                             tape.constant(std::move(av)));
  ad::Var kl_d = dist::op::kl_diag_gaussians(out.duration_mean, out.duration_var,
                                             tape.constant(std::move(dm)),
                                             tape.constant(std::move(dv)));
  return ad::add(ad::weighted_sum(kl_a, mask), ad::weighted_sum(kl_d, mask));
}

// ---- target store ------------------------------------------------------------

namespace {

void check_target(const ProsodyTarget& t) {
  const Index W = t.acoustic_mean.rows();
  if (W < 1 || t.acoustic_var.rows() != W || t.duration_mean.rows() != W ||
      t.duration_var.rows() != W || t.acoustic_var.cols() != t.acoustic_mean.cols() ||
      t.duration_var.cols() != t.duration_mean.cols()) {
    throw std::invalid_argument("prosody target '" + t.id + "': inconsistent shapes");
  }
  for (const MatrixF* v : {&t.acoustic_var, &t.duration_var}) {
    for (Index i = 0; i < v->size(); ++i) {
      const float x = v->data()[i];
      if (!(x > 0) || !std::isfinite(x)) {
        throw std::invalid_argument("prosody target '" + t.id + "': non-positive variance");
      }
    }
  }
}

}  // namespace

void ProsodyTargetStore::add(ProsodyTarget target) {
  check_target(target);
  auto it = std::lower_bound(records_.begin(), records_.end(), target.id,
                             [](const ProsodyTarget& r, const std::string& id) { return r.id < id; });
  if (it != records_.end() && it->id == target.id) {
    throw std::invalid_argument("duplicate prosody target '" + target.id + "'");
  }
  records_.insert(it, std::move(target));
}

const ProsodyTarget* ProsodyTargetStore::find(const std::string& id) const {
  auto it = std::lower_bound(records_.begin(), records_.end(), id,
                             [](const ProsodyTarget& r, const std::string& key) { return r.id < key; });
  return it != records_.end() && it->id == id ? &*it : nullptr;
}

void ProsodyTargetStore::save(const fs::path& file) const {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  for (const auto& r : records_) {
    json shapes = json::array();
    for (const MatrixF* m : {&r.acoustic_mean, &r.acoustic_var, &r.duration_mean, &r.duration_var}) {
      shapes.push_back({m->rows(), m->cols()});
    }
    const json header = {{"id", r.id}, {"speaker_id", r.speaker_id}, {"W", r.n_words()},
                         {"shapes", shapes}};
    out << header.dump() << '\n';
    for (const MatrixF* m : {&r.acoustic_mean, &r.acoustic_var, &r.duration_mean, &r.duration_var}) {
      binio::write_matrix(out, *m);
    }
  }
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

ProsodyTargetStore ProsodyTargetStore::load(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  ProsodyTargetStore store;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json h = json::parse(line);
      ProsodyTarget t;
      t.id = h.at("id").get<std::string>();
      t.speaker_id = h.at("speaker_id").get<std::string>();
      const auto shapes = h.at("shapes").get<std::vector<std::array<Index, 2>>>();
      if (shapes.size() != 4) throw std::invalid_argument("expected four matrices");
      MatrixF* mats[4] = {&t.acoustic_mean, &t.acoustic_var, &t.duration_mean, &t.duration_var};
      for (int k = 0; k < 4; ++k) {
        if (shapes[k][0] < 0 || shapes[k][1] < 0 || shapes[k][0] * shapes[k][1] > (1 << 26)) {
          throw std::invalid_argument("implausible matrix shape");
        }
        mats[k]->resize(shapes[k][0], shapes[k][1]);
        binio::read_matrix(in, *mats[k]);
      }
      if (t.n_words() != h.at("W").get<int>()) throw std::invalid_argument("W disagrees with shapes");
      store.add(std::move(t));
    } catch (const std::exception& e) {
      throw std::runtime_error(file.string() + ": bad target record: " + e.what());
    }
  }
  return store;
}

}  // namespace wordpros
