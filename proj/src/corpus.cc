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

#include "wordpros/corpus.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wordpros/kvconfig.h"

namespace wordpros::corpus {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---- utterance helpers -------------------------------------------------------

std::vector<int> Utterance::word_lengths() const {
  std::vector<int> out;
  out.reserve(word_spans.size());
  for (const auto& [b, e] : word_spans) out.push_back(e - b);
  return out;
}

std::vector<Span> Utterance::word_frame_spans() const {
  std::vector<Span> out;
  out.reserve(word_spans.size());
  int frame = 0;
  for (const auto& [b, e] : word_spans) {
    int len = 0;
    for (int p = b; p < e; ++p) len += durations[p];
    out.emplace_back(frame, frame + len);
    frame += len;
  }
  return out;
}

std::vector<int> Utterance::phoneme_to_word() const {
  std::vector<int> out(phonemes.size(), 0);
  for (int w = 0; w < n_words(); ++w) {
    for (int p = word_spans[w].first; p < word_spans[w].second; ++p) out[p] = w;
  }
  return out;
}

std::vector<int> Utterance::frame_to_word() const {
  std::vector<int> out;
  const auto p2w = phoneme_to_word();
  for (std::size_t p = 0; p < durations.size(); ++p) out.insert(out.end(), durations[p], p2w[p]);
  return out;
}

void validate(const Utterance& u) {
  const int P = u.n_phonemes();
  if (P == 0) throw ValidationError(u.id, "no phonemes");
  if (static_cast<int>(u.durations.size()) != P) {
    throw ValidationError(u.id, "durations length " + std::to_string(u.durations.size()) +
                                    " != phoneme count " + std::to_string(P));
  }
  if (u.word_spans.empty()) throw ValidationError(u.id, "no words");
  int expect = 0;
  for (std::size_t w = 0; w < u.word_spans.size(); ++w) {
    const auto [b, e] = u.word_spans[w];
    if (b != expect) throw ValidationError(u.id, "word spans do not partition the phonemes");
    if (e <= b) throw ValidationError(u.id, "word " + std::to_string(w) + " has an empty span");
    expect = e;
  }
  if (expect != P) throw ValidationError(u.id, "word spans do not partition the phonemes");
  long total = 0;
  for (int d : u.durations) {
    if (d < 0) throw ValidationError(u.id, "negative duration");
    total += d;
  }
  for (std::size_t w = 0; w < u.word_spans.size(); ++w) {
    int frames = 0;
    for (int p = u.word_spans[w].first; p < u.word_spans[w].second; ++p) frames += u.durations[p];
    if (frames == 0) {
      throw ValidationError(u.id, "word " + std::to_string(w) + " owns zero frames");
    }
  }
  if (total != u.mel.rows()) {
    throw ValidationError(u.id, "duration/frame mismatch: sum(durations) = " +
                                    std::to_string(total) + " but mel has " +
                                    std::to_string(u.mel.rows()) + " frames");
  }
  if (u.mel.cols() == 0) throw ValidationError(u.id, "mel has zero bins");
  if (!u.mel.allFinite()) throw ValidationError(u.id, "mel contains non-finite values");
}

const Utterance* Corpus::find(const std::string& id) const {
  auto it = std::lower_bound(utterances.begin(), utterances.end(), id,
                             [](const Utterance& u, const std::string& k) { return u.id < k; });
  return (it != utterances.end() && it->id == id) ? &*it : nullptr;
}

int Corpus::speaker_index(const std::string& speaker_id) const {
  auto it = std::find(speakers.begin(), speakers.end(), speaker_id);
  return it == speakers.end() ? -1 : static_cast<int>(it - speakers.begin());
}

Corpus make_corpus(std::vector<Utterance> utterances) {
  std::sort(utterances.begin(), utterances.end(),
            [](const Utterance& a, const Utterance& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < utterances.size(); ++i) {
    if (utterances[i].id == utterances[i - 1].id) {
      throw ValidationError(utterances[i].id, "duplicate utterance id");
    }
  }
  std::set<std::string> speakers, phonemes;
  for (const auto& u : utterances) {
    validate(u);
    speakers.insert(u.speaker_id);
    phonemes.insert(u.phonemes.begin(), u.phonemes.end());
  }
  Corpus c;
  c.utterances = std::move(utterances);
  c.speakers.assign(speakers.begin(), speakers.end());
  c.phoneme_inventory.assign(phonemes.begin(), phonemes.end());
  return c;
}

std::vector<Span> build_word_spans(const std::vector<int>& word_lengths) {
  std::vector<Span> spans;
  spans.reserve(word_lengths.size());
  int start = 0;
  for (std::size_t i = 0; i < word_lengths.size(); ++i) {
    if (word_lengths[i] < 1) {
      throw std::invalid_argument("word " + std::to_string(i) + " has length " +
                                  std::to_string(word_lengths[i]) + " (must be >= 1)");
    }
    spans.emplace_back(start, start + word_lengths[i]);
    start += word_lengths[i];
  }
  return spans;
}

// ---- raw float files --------------------------------------------------------

void write_mel_f32(const Matrix& mel, const fs::path& file) {
  std::vector<float> buf(static_cast<std::size_t>(mel.size()));
  for (Index i = 0; i < mel.size(); ++i) buf[i] = static_cast<float>(mel.data()[i]);
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& f : buf) {
      auto u = std::bit_cast<std::uint32_t>(f);
      u = __builtin_bswap32(u);
      f = std::bit_cast<float>(u);
    }
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

Matrix read_mel_f32(const fs::path& file, Index n_frames, Index n_bins) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw LoadError("cannot open mel file " + file.string());
  const auto expected = static_cast<std::uintmax_t>(n_frames * n_bins) * sizeof(float);
  std::error_code ec;
  const auto actual = fs::file_size(file, ec);
  if (ec || actual != expected) {
    throw LoadError("mel file " + file.string() + " has " + std::to_string(actual) +
                    " bytes, expected " + std::to_string(expected));
  }
  std::vector<float> buf(static_cast<std::size_t>(n_frames * n_bins));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(expected));
  if (!in) throw LoadError("short read on " + file.string());
  Matrix m(n_frames, n_bins);
  for (Index i = 0; i < m.size(); ++i) {
    float f = buf[i];
    if constexpr (std::endian::native == std::endian::big) {
      f = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(f)));
    }
    m.data()[i] = f;
  }
  return m;
}

// ---- load / save -------------------------------------------------------------

Corpus load_corpus(const fs::path& dir) {
  const fs::path manifest = dir / "manifest.jsonl";
  std::ifstream in(manifest);
  if (!in) throw LoadError("missing manifest: " + manifest.string());
  std::vector<Utterance> utts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw LoadError(manifest.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    Utterance u;
    try {
      u.id = j.at("id").get<std::string>();
      u.speaker_id = j.at("speaker_id").get<std::string>();
      u.text = j.at("text").get<std::string>();
      u.phonemes = j.at("phonemes").get<std::vector<std::string>>();
      u.durations = j.at("durations").get<std::vector<int>>();
      const auto lengths = j.at("word_lengths").get<std::vector<int>>();
      const auto n_frames = j.at("n_frames").get<Index>();
      const auto n_bins = j.at("n_bins").get<Index>();
      try {
        u.word_spans = build_word_spans(lengths);
      } catch (const std::invalid_argument& e) {
        throw ValidationError(u.id, e.what());
      }
      u.mel = read_mel_f32(dir / j.at("mel_file").get<std::string>(), n_frames, n_bins);
    } catch (const json::exception& e) {
      throw LoadError(manifest.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    validate(u);
    utts.push_back(std::move(u));
  }
  return make_corpus(std::move(utts));
}

void save_corpus(const Corpus& corpus, const fs::path& dir, const ProsodyTruth* truth) {
  fs::create_directories(dir / "mels");
  std::ofstream manifest(dir / "manifest.jsonl", std::ios::trunc);
  if (!manifest) throw std::runtime_error("cannot write manifest in " + dir.string());
  for (const auto& u : corpus.utterances) {
    const std::string mel_file = "mels/" + u.id + ".f32";
    json j = {{"id", u.id},
              {"speaker_id", u.speaker_id},
              {"text", u.text},
              {"phonemes", u.phonemes},
              {"word_lengths", u.word_lengths()},
              {"durations", u.durations},
              {"mel_file", mel_file},
              {"n_frames", u.mel.rows()},
              {"n_bins", u.mel.cols()}};
    manifest << j.dump() << '\n';
    write_mel_f32(u.mel, dir / mel_file);
  }
  if (truth == nullptr) return;
  std::ofstream side(dir / "prosody_truth.jsonl", std::ios::trunc);
  for (const auto& [id, f] : truth->by_utterance) {
    const Utterance* u = corpus.find(id);
    json j = {{"id", id},
              {"speaker_id", u ? u->speaker_id : std::string()},
              {"energy_gain", f.energy_gain},
              {"pitch_offset", f.pitch_offset},
              {"rate", f.rate}};
    if (u) {
      auto it = truth->speaker_rate.find(u->speaker_id);
      if (it != truth->speaker_rate.end()) j["speaker_rate"] = it->second;
    }
    side << j.dump() << '\n';
  }
}

ProsodyTruth load_prosody_truth(const fs::path& dir) {
  const fs::path file = dir / "prosody_truth.jsonl";
  std::ifstream in(file);
  if (!in) throw LoadError("missing prosody sidecar: " + file.string());
  ProsodyTruth truth;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    WordFactors f;
    f.energy_gain = j.at("energy_gain").get<std::vector<double>>();
    f.pitch_offset = j.at("pitch_offset").get<std::vector<double>>();
    f.rate = j.at("rate").get<std::vector<double>>();
    truth.by_utterance[j.at("id").get<std::string>()] = std::move(f);
    if (j.contains("speaker_rate")) {
      truth.speaker_rate[j.at("speaker_id").get<std::string>()] = j.at("speaker_rate").get<double>();
    }
  }
  return truth;
}

// ---- synthetic generator -------------------------------------------------------

namespace {

const char* const kSymbols[] = {"aa", "ae", "ah", "ao", "aw", "ay", "b",  "ch", "d",  "dh",
                                "eh", "er", "ey", "f",  "g",  "hh", "ih", "iy", "jh", "k",
                                "l",  "m",  "n",  "ng", "ow", "oy", "p",  "r",  "s",  "sh",
                                "t",  "th", "uh", "uw", "v",  "w",  "y",  "z",  "zh"};
constexpr int kMaxPhonemes = static_cast<int>(std::size(kSymbols));
constexpr double kSilenceLevel = 0.1;
constexpr double kPitchAmplitude = 0.8;
constexpr double kPitchWidth = 1.2;  // bins

double gauss_bump(double x, double centre, double width) {
  const double z = (x - centre) / width;
  return std::exp(-0.5 * z * z);
}

}  // namespace

void validate(const SynthSpec& s) {
  auto fail = [](const std::string& m) { throw std::invalid_argument("synth spec: " + m); };
  if (s.n_speakers < 1) fail("n_speakers must be positive");
  if (s.n_utterances < 1) fail("n_utterances must be positive");
  if (s.words_per_utterance.min < 1 || s.words_per_utterance.max < s.words_per_utterance.min) {
    fail("words_per_utterance range is empty or non-positive");
  }
  if (s.phonemes_per_word.min < 1 || s.phonemes_per_word.max < s.phonemes_per_word.min) {
    fail("phonemes_per_word range is empty or non-positive");
  }
  if (s.mel_bins < 4) fail("mel_bins must be at least 4");
  if (s.n_phonemes < 2 || s.n_phonemes > kMaxPhonemes) {
    fail("n_phonemes must be in [2, " + std::to_string(kMaxPhonemes) + "]");
  }
  if (s.vocabulary_size < 1) fail("vocabulary_size must be positive");
  if (!s.speaker_rates.empty() && static_cast<int>(s.speaker_rates.size()) != s.n_speakers) {
    fail("speaker_rates must list one rate per speaker");
  }
  for (double r : s.speaker_rates) {
    if (!(r > 0)) fail("speaker rates must be > 0");
  }
  for (double r : s.word_rate_choices) {
    if (!(r > 0)) fail("word rate choices must be > 0");
  }
  if (!(s.base_duration_min > 0) || s.base_duration_max < s.base_duration_min) {
    fail("base duration range is empty or non-positive");
  }
  if (s.energy_log_std < 0 || s.pitch_offset_std < 0 || s.rate_log_std < 0) {
    fail("factor standard deviations must be >= 0");
  }
  if (s.context_fraction < 0 || s.context_fraction > 1) fail("context_fraction must be in [0, 1]");
  if (s.pause_probability < 0 || s.pause_probability > 1) fail("pause_probability must be in [0, 1]");
  if (s.noise_level < 0) fail("noise_level must be >= 0");
}

SyntheticVoices::SyntheticVoices(const SynthSpec& spec) : spec_(spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int M = spec.mel_bins;

  for (int p = 0; p < spec.n_phonemes; ++p) {
    symbols_.emplace_back(kSymbols[p]);
    Matrix sig = Matrix::Zero(1, M);
    for (int f = 0; f < 2; ++f) {
      const double centre = unit(rng) * (M - 1);
      const double width = 0.8 + 1.2 * unit(rng);
      const double amp = 0.6 + 0.4 * unit(rng);
      for (int b = 0; b < M; ++b) sig(0, b) += amp * gauss_bump(b, centre, width);
    }
    signature_.push_back(std::move(sig));
    base_duration_.push_back(spec.base_duration_min +
                             (spec.base_duration_max - spec.base_duration_min) * unit(rng));
  }
  symbols_.emplace_back("sil");
  signature_.push_back(Matrix::Constant(1, M, kSilenceLevel));
  base_duration_.push_back(0.5 * (spec.base_duration_min + spec.base_duration_max));

  for (int s = 0; s < spec.n_speakers; ++s) {
    // Smooth envelope with a tilt; every speaker has the same mean level so
    // loudness alone does not identify the speaker.
    Matrix t = Matrix::Zero(1, M);
    const double tilt = normal(rng) * 0.5;
    for (int k = 0; k < 2; ++k) {
      const double centre = unit(rng) * (M - 1);
      const double width = 0.1 * M + 0.2 * M * unit(rng);
      for (int b = 0; b < M; ++b) t(0, b) += gauss_bump(b, centre, width);
    }
    for (int b = 0; b < M; ++b) t(0, b) += tilt * (static_cast<double>(b) / (M - 1) - 0.5);
    t.array() -= t.mean();
    timbre_.push_back(Matrix::Constant(1, M, 0.5) + spec.timbre_scale * t);
    const double lo = 0.2 * M, hi = 0.6 * M;
    const double frac = spec.n_speakers == 1 ? 0.5 : static_cast<double>(s) / (spec.n_speakers - 1);
    pitch_centre_.push_back(lo + (hi - lo) * frac + 0.5 * normal(rng));
    speaker_rate_.push_back(spec.speaker_rates.empty() ? 0.7 + 0.8 * unit(rng)
                                                       : spec.speaker_rates[s]);
  }

  std::set<std::string> seen;
  std::uniform_int_distribution<int> len_dist(spec.phonemes_per_word.min,
                                              spec.phonemes_per_word.max);
  std::uniform_int_distribution<int> ph_dist(0, spec.n_phonemes - 1);
  int attempts = 0;
  while (static_cast<int>(vocab_.size()) < spec.vocabulary_size) {
    Word w;
    const int len = len_dist(rng);
    for (int i = 0; i < len; ++i) w.phonemes.push_back(ph_dist(rng));
    for (int p : w.phonemes) w.text += symbols_[p];
    w.energy_z = normal(rng);
    w.pitch_z = normal(rng);
    w.rate_z = normal(rng);
    if (++attempts > 100 * spec.vocabulary_size) {
      throw std::invalid_argument("synth spec: vocabulary_size too large for phoneme inventory");
    }
    if (!seen.insert(w.text).second) continue;
    vocab_.push_back(std::move(w));
  }
}

int SyntheticVoices::duration(int phoneme, int speaker, double word_rate) const {
  const double d = base_duration_[phoneme] * speaker_rate_[speaker] * word_rate;
  return std::max(1, static_cast<int>(std::lround(d)));
}

Matrix SyntheticVoices::render(int speaker, const std::vector<int>& phonemes,
                               const std::vector<int>& durations, const std::vector<int>& word_of,
                               const WordFactors& factors) const {
  const int M = spec_.mel_bins;
  int T = 0;
  for (int d : durations) T += d;
  Matrix mel(T, M);
  int t = 0;
  for (std::size_t i = 0; i < phonemes.size(); ++i) {
    const int p = phonemes[i];
    const int w = word_of[i];
    Matrix row;
    if (p == silence_index()) {
      row = signature_[p];
    } else {
      row = timbre_[speaker] + signature_[p];
      const double centre = pitch_centre_[speaker] + factors.pitch_offset[w];
      for (int b = 0; b < M; ++b) row(0, b) += kPitchAmplitude * gauss_bump(b, centre, kPitchWidth);
    }
    row *= factors.energy_gain[w];
    for (int k = 0; k < durations[i]; ++k) mel.row(t++) = row;
  }
  return mel;
}

SyntheticCorpus generate_synthetic_corpus(const SynthSpec& spec) {
  const SyntheticVoices voices(spec);
  // Separate stream from the voice material so changing n_utterances does not
  // reshuffle speakers.
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> n_words_dist(spec.words_per_utterance.min,
                                                  spec.words_per_utterance.max);
  std::uniform_int_distribution<int> vocab_dist(0, static_cast<int>(voices.vocabulary().size()) - 1);
  const double ctx = std::sqrt(spec.context_fraction);
  const double free = std::sqrt(1.0 - spec.context_fraction);

  auto speaker_name = [](int s) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "spk%02d", s);
    return std::string(buf);
  };

  SyntheticCorpus out;
  std::vector<Utterance> utts;
  std::vector<int> per_speaker(spec.n_speakers, 0);
  for (int i = 0; i < spec.n_utterances; ++i) {
    const int s = i % spec.n_speakers;
    Utterance u;
    u.speaker_id = speaker_name(s);
    char id[32];
    std::snprintf(id, sizeof(id), "%s_%04d", u.speaker_id.c_str(), per_speaker[s]++);
    u.id = id;

    const int W = n_words_dist(rng);
    WordFactors f;
    std::vector<int> phonemes, word_of, lengths;
    std::vector<std::string> texts;
    for (int w = 0; w < W; ++w) {
      const auto& word = voices.vocabulary()[vocab_dist(rng)];
      const bool first = w == 0, last = w == W - 1;
      const double ez = word.energy_z + (first ? 1.0 : 0.0);
      const double pz = word.pitch_z - (last ? 1.0 : 0.0);
      const double rz = word.rate_z + (last ? 1.0 : 0.0);
      const double e_free = normal(rng), p_free = normal(rng), r_free = normal(rng);
      f.energy_gain.push_back(std::exp(spec.energy_log_std * (ctx * ez + free * e_free)));
      f.pitch_offset.push_back(spec.pitch_offset_std * (ctx * pz + free * p_free));
      if (spec.word_rate_choices.empty()) {
        f.rate.push_back(std::exp(spec.rate_log_std * (ctx * rz + free * r_free)));
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, spec.word_rate_choices.size() - 1);
        f.rate.push_back(spec.word_rate_choices[pick(rng)]);
      }
      std::vector<int> ph = word.phonemes;
      const bool pause = last ? spec.final_silence : unit(rng) < spec.pause_probability;
      if (pause) ph.push_back(voices.silence_index());
      for (int p : ph) {
        phonemes.push_back(p);
        word_of.push_back(w);
      }
      lengths.push_back(static_cast<int>(ph.size()));
      texts.push_back(word.text);
    }
    for (std::size_t k = 0; k < phonemes.size(); ++k) {
      u.durations.push_back(voices.duration(phonemes[k], s, f.rate[word_of[k]]));
      u.phonemes.push_back(voices.phoneme_symbols()[phonemes[k]]);
    }
    u.word_spans = build_word_spans(lengths);
    for (std::size_t k = 0; k < texts.size(); ++k) u.text += (k ? " " : "") + texts[k];
    Matrix mel = voices.render(s, phonemes, u.durations, word_of, f);
    if (spec.noise_level > 0) {
      for (Index k = 0; k < mel.size(); ++k) mel.data()[k] += spec.noise_level * normal(rng);
    }
    // Store float-representable values so a saved corpus reloads bit-identically.
    u.mel = mel.cast<float>().cast<double>();
    out.truth.by_utterance[u.id] = std::move(f);
    utts.push_back(std::move(u));
  }
  for (int s = 0; s < spec.n_speakers; ++s) {
    out.truth.speaker_rate[speaker_name(s)] = voices.speaker_rate(s);
  }
  out.corpus = make_corpus(std::move(utts));
  return out;
}

SynthSpec parse_synth_spec(const std::string& text) {
  KeyValues kv = KeyValues::parse(text);
  SynthSpec s;
  kv.get("n_speakers", s.n_speakers);
  kv.get("n_utterances", s.n_utterances);
  kv.get("words_per_utterance_min", s.words_per_utterance.min);
  kv.get("words_per_utterance_max", s.words_per_utterance.max);
  kv.get("phonemes_per_word_min", s.phonemes_per_word.min);
  kv.get("phonemes_per_word_max", s.phonemes_per_word.max);
  kv.get("mel_bins", s.mel_bins);
  kv.get("n_phonemes", s.n_phonemes);
  kv.get("vocabulary_size", s.vocabulary_size);
  kv.get("speaker_rates", s.speaker_rates);
  kv.get("timbre_scale", s.timbre_scale);
  kv.get("base_duration_min", s.base_duration_min);
  kv.get("base_duration_max", s.base_duration_max);
  kv.get("energy_log_std", s.energy_log_std);
  kv.get("pitch_offset_std", s.pitch_offset_std);
  kv.get("rate_log_std", s.rate_log_std);
  kv.get("context_fraction", s.context_fraction);
  kv.get("word_rate_choices", s.word_rate_choices);
  kv.get("pause_probability", s.pause_probability);
  kv.get("final_silence", s.final_silence);
  kv.get("noise_level", s.noise_level);
  kv.get("seed", s.seed);
  kv.finish();
  validate(s);
  return s;
}

SynthSpec load_synth_spec(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw LoadError("cannot open synth spec " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_synth_spec(ss.str());
}

}  // namespace wordpros::corpus
