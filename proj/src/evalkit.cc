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

#include "wordpros/evalkit.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>

#include <png.h>

#include "wordpros/pipeline.h"

namespace wordpros::eval {

using json = nlohmann::json;
namespace fs = std::filesystem;

ReconMetrics recon_metrics(const Matrix& pred, const Matrix& ref) {
  require_same_shape(pred, ref, "recon_metrics");
  if (pred.size() == 0) throw ShapeError("recon_metrics: empty mel");
  ReconMetrics m;
  const Matrix sq = (pred - ref).cwiseAbs2();
  m.mse = sq.mean();
  m.per_band.resize(static_cast<std::size_t>(sq.cols()));
  for (Index b = 0; b < sq.cols(); ++b) m.per_band[b] = sq.col(b).mean();
  return m;
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  Correlation c;
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) return c;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  // Relative threshold: sums of squares that are rounding noise count as zero.
  const double tiny = 1e-24;
  if (sxx <= tiny * (1 + mx * mx) * n || syy <= tiny * (1 + my * my) * n) return c;
  c.defined = true;
  c.value = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return c;
}

std::vector<double> word_durations(std::span<const int> durations,
                                   std::span<const corpus::Span> word_spans) {
  std::vector<double> out;
  for (const auto& [b, e] : word_spans) {
    if (b < 0 || e > static_cast<int>(durations.size()) || e <= b) {
      throw std::invalid_argument("word span outside the duration sequence");
    }
    double s = 0;
    for (int p = b; p < e; ++p) s += durations[p];
    out.push_back(s);
  }
  return out;
}

std::vector<double> word_energies(const Matrix& mel, std::span<const int> durations,
                                  std::span<const corpus::Span> word_spans) {
  const std::vector<double> frames = word_durations(durations, word_spans);
  const double total = std::accumulate(frames.begin(), frames.end(), 0.0);
  if (static_cast<Index>(total) != mel.rows()) {
    throw std::invalid_argument("durations sum to " + std::to_string(static_cast<long>(total)) +
                                " but the mel has " + std::to_string(mel.rows()) + " frames");
  }
  std::vector<double> out;
  Index t = 0;
  for (double f : frames) {
    const auto n = static_cast<Index>(f);
    out.push_back(n > 0 ? mel.middleRows(t, n).mean() : 0.0);
    t += n;
  }
  return out;
}

ProsodyCorrelation prosody_correlation(const corpus::Utterance& reference, const Matrix& gen_mel,
                                       std::span<const int> gen_durations,
                                       std::span<const corpus::Span> word_spans) {
  if (word_spans.size() < 3) {
    throw std::invalid_argument("prosody_correlation needs at least 3 words, got " +
                                std::to_string(word_spans.size()));
  }
  if (static_cast<int>(word_spans.size()) != reference.n_words()) {
    throw std::invalid_argument("prosody_correlation: word counts differ");
  }
  ProsodyCorrelation r;
  const auto rd = word_durations(reference.durations, reference.word_spans);
  const auto gd = word_durations(gen_durations, word_spans);
  r.duration_r = pearson(rd, gd);
  const auto re = word_energies(reference.mel, reference.durations, reference.word_spans);
  const auto ge = word_energies(gen_mel, gen_durations, word_spans);
  r.energy_r = pearson(re, ge);
  return r;
}

// ---- probe ---------------------------------------------------------------------

ProbeResult speaker_probe(const Matrix& features, std::span<const int> labels,
                          const ProbeOptions& options) {
  const Index N = features.rows(), F = features.cols();
  if (static_cast<Index>(labels.size()) != N) {
    throw ProbeDataError("speaker_probe: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(N) + " rows");
  }
  if (F < 1) throw ProbeDataError("speaker_probe: features have no columns");
  int K = 0;
  for (int l : labels) {
    if (l < 0) throw ProbeDataError("speaker_probe: negative label");
    K = std::max(K, l + 1);
  }
  if (K < 2) throw ProbeDataError("speaker_probe: need at least 2 speakers, got " + std::to_string(K));
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(K));
  for (Index i = 0; i < N; ++i) by_class[labels[i]].push_back(static_cast<int>(i));
  for (int k = 0; k < K; ++k) {
    const int have = static_cast<int>(by_class[k].size());
    if (have < options.min_per_class) {
      throw ProbeDataError("speaker_probe: speaker " + std::to_string(k) + " has " +
                           std::to_string(have) + " words, need " +
                           std::to_string(options.min_per_class) + " (short by " +
                           std::to_string(options.min_per_class - have) + ")");
    }
  }

  nn::Rng rng(options.seed);
  std::vector<int> train, test;
  for (auto& idx : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::floor(options.train_fraction * idx.size()));
    train.insert(train.end(), idx.begin(), idx.begin() + n_train);
    test.insert(test.end(), idx.begin() + n_train, idx.end());
  }

  Matrix Xtr(static_cast<Index>(train.size()), F);
  for (std::size_t i = 0; i < train.size(); ++i) Xtr.row(i) = features.row(train[i]);
  const Eigen::RowVectorXd mu = Xtr.colwise().mean();
  Eigen::RowVectorXd sd = ((Xtr.rowwise() - mu).cwiseAbs2().colwise().mean()).cwiseSqrt();
  for (Index f = 0; f < F; ++f) {
    if (!(sd(f) > 1e-12)) sd(f) = 1.0;
  }
  auto standardize = [&](const Matrix& X) -> Matrix {
    return ((X.rowwise() - mu).array().rowwise() / sd.array()).matrix();
  };
  Xtr = standardize(Xtr);
  Matrix Y = Matrix::Zero(Xtr.rows(), K);
  for (std::size_t i = 0; i < train.size(); ++i) Y(static_cast<Index>(i), labels[train[i]]) = 1.0;

  Matrix W = Matrix::Zero(F, K);
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(K);
  Matrix vW = Matrix::Zero(F, K);
  Eigen::RowVectorXd vb = Eigen::RowVectorXd::Zero(K);
  const double n = static_cast<double>(Xtr.rows());
  auto softmax_rows = [](Matrix logits) {
    for (Index r = 0; r < logits.rows(); ++r) {
      logits.row(r).array() -= logits.row(r).maxCoeff();
      logits.row(r) = logits.row(r).array().exp().matrix();
      logits.row(r) /= logits.row(r).sum();
    }
    return logits;
  };
  // Heavy-ball gradient descent on the convex softmax objective.
  for (int it = 0; it < options.iterations; ++it) {
    const Matrix P = softmax_rows((Xtr * W).rowwise() + b);
    const Matrix G = (P - Y) / n;
    const Matrix gW = Xtr.transpose() * G + options.l2 * W;
    const Eigen::RowVectorXd gb = G.colwise().sum();
    vW = 0.9 * vW - options.learning_rate * gW;
    vb = 0.9 * vb - options.learning_rate * gb;
    W += vW;
    b += vb;
  }

  Matrix Xte(static_cast<Index>(test.size()), F);
  for (std::size_t i = 0; i < test.size(); ++i) Xte.row(i) = features.row(test[i]);
  const Matrix scores = (standardize(Xte) * W).rowwise() + b;
  ProbeResult r;
  r.n_classes = K;
  r.chance = 1.0 / K;
  r.n_train = static_cast<int>(train.size());
  r.n_test = static_cast<int>(test.size());
  std::vector<int> hit(static_cast<std::size_t>(K), 0), seen(static_cast<std::size_t>(K), 0);
  int correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    Index pred = 0;
    scores.row(static_cast<Index>(i)).maxCoeff(&pred);
    const int truth = labels[test[i]];
    ++seen[truth];
    if (pred == truth) {
      ++correct;
      ++hit[truth];
    }
  }
  r.accuracy = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
  for (int k = 0; k < K; ++k) {
    r.per_class_accuracy.push_back(seen[k] ? static_cast<double>(hit[k]) / seen[k] : 0.0);
  }
  return r;
}

// ---- reports ---------------------------------------------------------------------

const Metric* EvalReport::find(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

json EvalReport::to_json() const {
  json ms = json::array();
  for (const auto& m : metrics) {
    json j = {{"name", m.name}, {"count", m.count}, {"defined", m.defined},
              {"per_speaker", m.per_speaker}};
    j["value"] = m.defined ? json(m.value) : json(nullptr);
    ms.push_back(j);
  }
  return {{"schema", "wordpros-eval-report/1"},
          {"config_fingerprint", config_fingerprint},
          {"checkpoint_fingerprint", checkpoint_fingerprint},
          {"speakers", speakers},
          {"metrics", ms}};
}

EvalReport EvalReport::from_json(const json& j) {
  EvalReport r;
  r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  r.checkpoint_fingerprint = j.at("checkpoint_fingerprint").get<std::string>();
  r.speakers = j.at("speakers").get<std::vector<std::string>>();
  for (const auto& jm : j.at("metrics")) {
    Metric m;
    m.name = jm.at("name").get<std::string>();
    m.count = jm.at("count").get<std::size_t>();
    m.defined = jm.at("defined").get<bool>();
    if (m.defined) m.value = jm.at("value").get<double>();
    m.per_speaker = jm.at("per_speaker").get<std::map<std::string, double>>();
    r.metrics.push_back(std::move(m));
  }
  return r;
}

namespace {

struct Canvas {
  int width, height;
  std::vector<unsigned char> rgb;
  Canvas(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 255) {}
  void set(int x, int y, unsigned char r, unsigned char g, unsigned char b) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    auto* p = &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
  void hline(int x0, int x1, int y, unsigned char c) {
    for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) set(x, y, c, c, c);
  }
  void vline(int x, int y0, int y1, unsigned char c) {
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y) set(x, y, c, c, c);
  }
};

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void write_png(const Canvas& c, const fs::path& file) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(file.string().c_str(), "wb"), &std::fclose);
  if (!fp) throw std::runtime_error("cannot write " + file.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng failed writing " + file.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, c.width, c.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < c.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(&c.rgb[static_cast<std::size_t>(y) * c.width * 3]));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_box_plot(const std::map<std::string, std::vector<double>>& groups,
                    const fs::path& file) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& [name, v] : groups) {
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (!std::isfinite(lo)) throw std::invalid_argument("box plot needs at least one value");
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const int box_w = 60, gap = 40, margin = 30, plot_h = 240;
  const int n = static_cast<int>(groups.size());
  Canvas c(margin * 2 + n * box_w + (n - 1) * gap, plot_h + 2 * margin);
  auto ypix = [&](double v) {
    return margin + static_cast<int>(std::lround((hi - v) / (hi - lo) * plot_h));
  };
  c.vline(margin / 2, margin, margin + plot_h, 0);
  int x0 = margin;
  for (const auto& [name, v] : groups) {
    if (!v.empty()) {
      const int q1 = ypix(quantile(v, 0.25)), q3 = ypix(quantile(v, 0.75));
      const int med = ypix(quantile(v, 0.5));
      const int mn = ypix(*std::min_element(v.begin(), v.end()));
      const int mx = ypix(*std::max_element(v.begin(), v.end()));
      for (int y = std::min(q1, q3); y <= std::max(q1, q3); ++y) {
        for (int x = x0 + 1; x < x0 + box_w; ++x) c.set(x, y, 170, 200, 235);
      }
      c.hline(x0, x0 + box_w, q1, 0);
      c.hline(x0, x0 + box_w, q3, 0);
      c.vline(x0, q1, q3, 0);
      c.vline(x0 + box_w, q1, q3, 0);
      for (int x = x0; x <= x0 + box_w; ++x) c.set(x, med, 200, 30, 30);
      c.vline(x0 + box_w / 2, mx, std::min(q1, q3), 0);
      c.vline(x0 + box_w / 2, std::max(q1, q3), mn, 0);
      c.hline(x0 + box_w / 4, x0 + 3 * box_w / 4, mx, 0);
      c.hline(x0 + box_w / 4, x0 + 3 * box_w / 4, mn, 0);
    }
    x0 += box_w + gap;
  }
  write_png(c, file);
}

std::vector<fs::path> emit_report(const EvalReport& report, const fs::path& path, bool plots) {
  for (const auto& m : report.metrics) {
    if (m.count == 0) throw std::invalid_argument("metric '" + m.name + "' has no samples");
  }
  {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report " + path.string());
    out << report.to_json().dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing report " + path.string());
  }
  std::vector<fs::path> images;
  if (!plots) return images;
  for (const auto& m : report.metrics) {
    bool any = false;
    for (const auto& [k, v] : m.samples) any = any || !v.empty();
    if (!any) continue;
    fs::path img = path.parent_path() / (path.stem().string() + "." + m.name + ".png");
    write_box_plot(m.samples, img);
    images.push_back(img);
  }
  return images;
}

// ---- full evaluation ---------------------------------------------------------------

std::vector<TransferPair> transfer_pairs(const corpus::Corpus& corpus, int n_pairs,
                                         std::uint64_t seed) {
  const int S = static_cast<int>(corpus.speakers.size());
  if (S < 2) throw std::invalid_argument("transfer pairs need at least two speakers");
  std::vector<std::vector<int>> by_speaker(static_cast<std::size_t>(S));
  for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
    by_speaker[corpus.speaker_index(corpus.utterances[i].speaker_id)].push_back(static_cast<int>(i));
  }
  nn::Rng rng(seed);
  std::vector<TransferPair> pairs;
  for (int k = 0; k < n_pairs; ++k) {
    const int target = k % S;
    std::vector<int> candidates;
    for (int s = 0; s < S; ++s) {
      if (s != target) candidates.insert(candidates.end(), by_speaker[s].begin(), by_speaker[s].end());
    }
    if (candidates.empty()) throw std::invalid_argument("no reference utterances for transfer");
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    pairs.push_back({candidates[pick(rng)], target});
  }
  return pairs;
}

std::map<std::string, double> speaker_mean_phoneme_duration(const corpus::Corpus& corpus) {
  std::map<std::string, std::pair<double, double>> acc;
  for (const auto& u : corpus.utterances) {
    auto& [sum, n] = acc[u.speaker_id];
    for (int d : u.durations) sum += d;
    n += static_cast<double>(u.durations.size());
  }
  std::map<std::string, double> out;
  for (const auto& [s, v] : acc) out[s] = v.first / v.second;
  return out;
}

namespace {

Metric summarize(const std::string& name, const std::map<std::string, std::vector<double>>& samples,
                 const std::vector<std::string>& speakers) {
  Metric m;
  m.name = name;
  double total = 0;
  for (const auto& s : speakers) {
    auto it = samples.find(s);
    if (it == samples.end() || it->second.empty()) continue;
    const double sum = std::accumulate(it->second.begin(), it->second.end(), 0.0);
    m.per_speaker[s] = sum / static_cast<double>(it->second.size());
    total += sum;
    m.count += it->second.size();
  }
  m.value = m.count ? total / static_cast<double>(m.count) : 0.0;
  m.defined = m.count > 0;
  m.samples = samples;
  return m;
}

Metric probe_metric(const std::string& name, const Matrix& X, const std::vector<int>& labels,
                    const std::vector<std::string>& speakers, const ProbeOptions& options) {
  const ProbeResult r = speaker_probe(X, labels, options);
  Metric m;
  m.name = name;
  m.value = r.accuracy;
  m.count = static_cast<std::size_t>(r.n_test);
  for (int k = 0; k < r.n_classes && k < static_cast<int>(speakers.size()); ++k) {
    m.per_speaker[speakers[k]] = r.per_class_accuracy[k];
  }
  return m;
}

}  // namespace

EvalReport evaluate(const Model& model, const corpus::Corpus& corpus,
                    const ContextEmbedder* embedder, const EvalOptions& options) {
  EvalReport report;
  report.speakers = corpus.speakers;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(model.config().fingerprint()));
  report.config_fingerprint = buf;
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(model.fingerprint()));
  report.checkpoint_fingerprint = buf;

  std::map<std::string, std::vector<double>> copy_mse, tts_mse;
  std::vector<Matrix> z_rows, zd_rows, spk_rows;
  std::vector<int> labels;
  for (const auto& u : corpus.utterances) {
    const Example ex = model.prepare(u);
    const Posteriors post = encode_posteriors(model, ex);
    copy_mse[u.speaker_id].push_back(recon_metrics(copy_synthesis(model, ex), u.mel).mse);
    if (model.has_predictor() && embedder != nullptr) {
      tts_mse[u.speaker_id].push_back(recon_metrics(tts_aligned(model, *embedder, u), u.mel).mse);
    }
    const int label = corpus.speaker_index(u.speaker_id);
    for (int w = 0; w < ex.align.n_words(); ++w) {
      z_rows.push_back(post.acoustic.mean.row(w));
      zd_rows.push_back(post.duration.mean.row(w));
      spk_rows.push_back(model.acoustic_speakers().embedding(ex.speaker));
      labels.push_back(label);
    }
  }
  report.metrics.push_back(summarize("copy_synthesis_mse", copy_mse, corpus.speakers));
  if (!tts_mse.empty()) report.metrics.push_back(summarize("tts_mse", tts_mse, corpus.speakers));

  if (corpus.speakers.size() >= 2 && options.fpt_pairs > 0) {
    const auto means = speaker_mean_phoneme_duration(corpus);
    std::map<std::string, std::vector<double>> dur_r, energy_r, toward_target;
    for (const auto& p : transfer_pairs(corpus, options.fpt_pairs, options.seed)) {
      const auto& ref = corpus.utterances[p.reference];
      const std::string& target = corpus.speakers[p.target];
      const Synthesis s = infer_fpt(model, ref, target);
      const double gen_mean = std::accumulate(s.durations.begin(), s.durations.end(), 0.0) /
                              static_cast<double>(s.durations.size());
      toward_target[target].push_back(std::abs(gen_mean - means.at(target)) <
                                              std::abs(gen_mean - means.at(ref.speaker_id))
                                          ? 1.0
                                          : 0.0);
      if (ref.n_words() < 3) continue;
      const ProsodyCorrelation c = prosody_correlation(ref, s.mel, s.durations, ref.word_spans);
      if (c.duration_r.defined) dur_r[target].push_back(c.duration_r.value);
      if (c.energy_r.defined) energy_r[target].push_back(c.energy_r.value);
    }
    for (auto* m : {&dur_r, &energy_r}) {
      const Metric s = summarize(m == &dur_r ? "fpt_duration_r" : "fpt_energy_r", *m, corpus.speakers);
      if (s.count > 0) report.metrics.push_back(s);
    }
    report.metrics.push_back(summarize("fpt_toward_target_rate", toward_target, corpus.speakers));
  }

  auto stack = [](const std::vector<Matrix>& rows) {
    Matrix X(static_cast<Index>(rows.size()), rows.empty() ? 0 : rows[0].cols());
    for (std::size_t i = 0; i < rows.size(); ++i) X.row(static_cast<Index>(i)) = rows[i];
    return X;
  };
  try {
    report.metrics.push_back(
        probe_metric("probe_z_accuracy", stack(z_rows), labels, corpus.speakers, options.probe));
    report.metrics.push_back(
        probe_metric("probe_zd_accuracy", stack(zd_rows), labels, corpus.speakers, options.probe));
    report.metrics.push_back(probe_metric("probe_speaker_embedding_accuracy", stack(spk_rows),
                                          labels, corpus.speakers, options.probe));
    Metric chance;
    chance.name = "probe_chance";
    chance.value = 1.0 / static_cast<double>(corpus.speakers.size());
    chance.count = 1;
    report.metrics.push_back(chance);
  } catch (const ProbeDataError&) {
    // Too little data for a probe; the report simply omits it.
  }
  return report;
}

}  // namespace wordpros::eval
