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

#include "wordpros/model.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wordpros/kvconfig.h"

namespace wordpros {

namespace fs = std::filesystem;

namespace {

template <typename T>
void field(KeyValues& kv, const char* key, T& out) {
  kv.get(key, out);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Fixed seed offsets keep the model streams independent of each other.
constexpr std::uint64_t kPredictorStream = 0x5bd1e995a2f4c8e1ULL;

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  KeyValues kv = KeyValues::parse(text);
  RunConfig c;
  field(kv, "corpus", c.corpus);
  field(kv, "seed", c.seed);
  field(kv, "speaker_dim", c.speaker_dim);
  field(kv, "encoding_dim", c.encoding_dim);
  field(kv, "latent_dim", c.latent_dim);
  field(kv, "encoder_layers", c.encoder_layers);
  field(kv, "encoder_kernel", c.encoder_kernel);
  field(kv, "reference_width", c.reference_width);
  field(kv, "reference_layers", c.reference_layers);
  field(kv, "reference_kernel", c.reference_kernel);
  field(kv, "decoder_width", c.decoder_width);
  field(kv, "decoder_layers", c.decoder_layers);
  field(kv, "decoder_kernel", c.decoder_kernel);
  field(kv, "duration_latent_dim", c.duration_latent_dim);
  field(kv, "duration_encoding_dim", c.duration_encoding_dim);
  field(kv, "duration_reference_width", c.duration_reference_width);
  field(kv, "duration_head_width", c.duration_head_width);
  field(kv, "duration_head_layers", c.duration_head_layers);
  field(kv, "share_speaker_table", c.share_speaker_table);
  field(kv, "anneal_start", c.anneal.start_step);
  field(kv, "anneal_end", c.anneal.end_step);
  field(kv, "learning_rate", c.learning_rate);
  field(kv, "steps", c.steps);
  field(kv, "batch_size", c.batch_size);
  field(kv, "clip_norm", c.clip_norm);
  field(kv, "acoustic_recon_variance", c.acoustic_recon_variance);
  field(kv, "duration_recon_variance", c.duration_recon_variance);
  field(kv, "log_every", c.log_every);
  field(kv, "projection_dim", c.projection_dim);
  field(kv, "lstm_hidden", c.lstm_hidden);
  field(kv, "stage2_learning_rate", c.stage2_learning_rate);
  field(kv, "stage2_steps", c.stage2_steps);
  field(kv, "stage2_batch_size", c.stage2_batch_size);
  field(kv, "stage2_lr_schedule", c.stage2_lr_schedule);
  field(kv, "embedder", c.embedder);
  field(kv, "hash_dim", c.hash_dim);
  field(kv, "hash_seed", c.hash_seed);
  field(kv, "embeddings_file", c.embeddings_file);
  kv.finish();
  c.validate();
  return c;
}

RunConfig RunConfig::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c = parse(ss.str());
  // A relative corpus path is taken relative to the config file.
  if (!c.corpus.empty() && fs::path(c.corpus).is_relative()) {
    c.corpus = (file.parent_path() / c.corpus).lexically_normal().string();
  }
  return c;
}

std::string RunConfig::to_text() const {
  std::ostringstream o;
  o << "corpus = " << corpus << "\n"
    << "seed = " << seed << "\n"
    << "speaker_dim = " << speaker_dim << "\n"
    << "encoding_dim = " << encoding_dim << "\n"
    << "latent_dim = " << latent_dim << "\n"
    << "encoder_layers = " << encoder_layers << "\n"
    << "encoder_kernel = " << encoder_kernel << "\n"
    << "reference_width = " << reference_width << "\n"
    << "reference_layers = " << reference_layers << "\n"
    << "reference_kernel = " << reference_kernel << "\n"
    << "decoder_width = " << decoder_width << "\n"
    << "decoder_layers = " << decoder_layers << "\n"
    << "decoder_kernel = " << decoder_kernel << "\n"
    << "duration_latent_dim = " << duration_latent_dim << "\n"
    << "duration_encoding_dim = " << duration_encoding_dim << "\n"
    << "duration_reference_width = " << duration_reference_width << "\n"
    << "duration_head_width = " << duration_head_width << "\n"
    << "duration_head_layers = " << duration_head_layers << "\n"
    << "share_speaker_table = " << (share_speaker_table ? "true" : "false") << "\n"
    << "anneal_start = " << anneal.start_step << "\n"
    << "anneal_end = " << anneal.end_step << "\n"
    << "learning_rate = " << num(learning_rate) << "\n"
    << "steps = " << steps << "\n"
    << "batch_size = " << batch_size << "\n"
    << "clip_norm = " << num(clip_norm) << "\n"
    << "acoustic_recon_variance = " << num(acoustic_recon_variance) << "\n"
    << "duration_recon_variance = " << num(duration_recon_variance) << "\n"
    << "log_every = " << log_every << "\n"
    << "projection_dim = " << projection_dim << "\n"
    << "lstm_hidden = " << lstm_hidden << "\n"
    << "stage2_learning_rate = " << num(stage2_learning_rate) << "\n"
    << "stage2_steps = " << stage2_steps << "\n"
    << "stage2_batch_size = " << stage2_batch_size << "\n"
    << "stage2_lr_schedule = " << stage2_lr_schedule << "\n"
    << "embedder = " << embedder << "\n"
    << "hash_dim = " << hash_dim << "\n"
    << "hash_seed = " << hash_seed << "\n"
    << "embeddings_file = " << embeddings_file << "\n";
  return o.str();
}

void RunConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("config: ") + what);
  };
  need(speaker_dim > 0 && encoding_dim > 0 && latent_dim > 0 && duration_latent_dim > 0,
       "speaker_dim, encoding_dim, latent_dim, duration_latent_dim must be positive");
  need(reference_width > 0 && decoder_width > 0 && duration_encoding_dim > 0 &&
           duration_reference_width > 0 && duration_head_width > 0,
       "layer widths must be positive");
  need(encoder_layers > 0 && reference_layers > 0 && decoder_layers > 0 && duration_head_layers > 0,
       "layer counts must be positive");
  for (int k : {encoder_kernel, reference_kernel, decoder_kernel}) {
    need(k > 0 && k % 2 == 1, "kernel sizes must be odd and positive");
  }
  need(anneal.start_step >= 0 && anneal.end_step > anneal.start_step,
       "anneal_start must be >= 0 and below anneal_end");
  need(learning_rate > 0 && stage2_learning_rate > 0, "learning rates must be positive");
  need(steps >= 0 && stage2_steps >= 0, "step counts must be non-negative");
  need(batch_size > 0, "batch_size must be positive");
  need(stage2_batch_size >= 0, "stage2_batch_size must be non-negative");
  need(acoustic_recon_variance > 0 && duration_recon_variance > 0,
       "reconstruction variances must be positive");
  need(log_every > 0, "log_every must be positive");
  need(projection_dim > 0 && lstm_hidden > 0, "predictor dimensions must be positive");
  need(stage2_lr_schedule == "constant" || stage2_lr_schedule == "cosine",
       "stage2_lr_schedule must be constant or cosine");
  need(embedder == "hash" || embedder == "precomputed", "embedder must be hash or precomputed");
  need(embedder != "precomputed" || !embeddings_file.empty(),
       "embedder = precomputed needs embeddings_file");
  need(hash_dim > 0, "hash_dim must be positive");
}

std::uint64_t RunConfig::fingerprint() const {
  const std::string t = to_text();
  return fnv1a(t.data(), t.size());
}

RunConfig RunConfig::with_stage2_settings(const RunConfig& other) const {
  RunConfig out = *this;
  out.log_every = other.log_every;
  out.clip_norm = other.clip_norm;
  out.projection_dim = other.projection_dim;
  out.lstm_hidden = other.lstm_hidden;
  out.stage2_learning_rate = other.stage2_learning_rate;
  out.stage2_steps = other.stage2_steps;
  out.stage2_batch_size = other.stage2_batch_size;
  out.stage2_lr_schedule = other.stage2_lr_schedule;
  out.embedder = other.embedder;
  out.hash_dim = other.hash_dim;
  out.hash_seed = other.hash_seed;
  out.embeddings_file = other.embeddings_file;
  // Stage I optimisation settings may differ; the architecture and seed may not.
  RunConfig theirs = out;
  theirs.corpus = other.corpus;
  theirs.seed = other.seed;
  theirs.speaker_dim = other.speaker_dim;
  theirs.encoding_dim = other.encoding_dim;
  theirs.latent_dim = other.latent_dim;
  theirs.encoder_layers = other.encoder_layers;
  theirs.encoder_kernel = other.encoder_kernel;
  theirs.reference_width = other.reference_width;
  theirs.reference_layers = other.reference_layers;
  theirs.reference_kernel = other.reference_kernel;
  theirs.decoder_width = other.decoder_width;
  theirs.decoder_layers = other.decoder_layers;
  theirs.decoder_kernel = other.decoder_kernel;
  theirs.duration_latent_dim = other.duration_latent_dim;
  theirs.duration_encoding_dim = other.duration_encoding_dim;
  theirs.duration_reference_width = other.duration_reference_width;
  theirs.duration_head_width = other.duration_head_width;
  theirs.duration_head_layers = other.duration_head_layers;
  theirs.share_speaker_table = other.share_speaker_table;
  theirs.corpus = out.corpus;
  if (theirs.to_text() != out.to_text()) {
    throw ConfigError("config disagrees with the Stage I checkpoint on model dimensions or seed");
  }
  out.validate();
  return out;
}

std::unique_ptr<ContextEmbedder> make_embedder(const RunConfig& config) {
  if (config.embedder == "precomputed") {
    return std::make_unique<PrecomputedEmbedder>(config.embeddings_file);
  }
  return std::make_unique<HashContextEmbedder>(config.hash_dim, config.hash_seed);
}

Model::Model(const RunConfig& config, std::vector<std::string> phoneme_inventory,
             std::vector<std::string> speakers, Index mel_bins)
    : config_(config),
      phonemes_(std::move(phoneme_inventory)),
      speakers_(std::move(speakers)),
      mel_bins_(mel_bins) {
  config_.validate();
  if (phonemes_.empty() || speakers_.empty() || mel_bins_ < 1) {
    throw std::invalid_argument("model needs a phoneme inventory, speakers and mel bins");
  }
  for (std::size_t i = 0; i < phonemes_.size(); ++i) {
    if (!phoneme_lookup_.emplace(phonemes_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate phoneme '" + phonemes_[i] + "'");
    }
  }
  const auto& c = config_;
  nn::Rng rng(c.seed);
  const auto n_spk = static_cast<Index>(speakers_.size());
  acoustic_speakers_ = std::make_unique<SpeakerTable>(n_spk, c.speaker_dim, rng);
  if (!c.share_speaker_table) {
    duration_speakers_ = std::make_unique<SpeakerTable>(n_spk, c.speaker_dim, rng);
  }
  AcousticConfig ac;
  ac.n_phonemes = static_cast<Index>(phonemes_.size());
  ac.mel_bins = mel_bins_;
  ac.speaker_dim = c.speaker_dim;
  ac.encoding_dim = c.encoding_dim;
  ac.latent_dim = c.latent_dim;
  ac.encoder_layers = c.encoder_layers;
  ac.encoder_kernel = c.encoder_kernel;
  ac.reference_width = c.reference_width;
  ac.reference_layers = c.reference_layers;
  ac.reference_kernel = c.reference_kernel;
  ac.decoder_width = c.decoder_width;
  ac.decoder_layers = c.decoder_layers;
  ac.decoder_kernel = c.decoder_kernel;
  acoustic_ = std::make_unique<AcousticModel>(ac, rng);

  DurationConfig dc;
  dc.n_phonemes = ac.n_phonemes;
  dc.mel_bins = mel_bins_;
  dc.speaker_dim = c.speaker_dim;
  dc.encoding_dim = c.duration_encoding_dim;
  dc.latent_dim = c.duration_latent_dim;
  dc.encoder_layers = c.encoder_layers;
  dc.encoder_kernel = c.encoder_kernel;
  dc.reference_width = c.duration_reference_width;
  dc.reference_layers = c.reference_layers;
  dc.reference_kernel = c.reference_kernel;
  dc.head_width = c.duration_head_width;
  dc.head_layers = c.duration_head_layers;
  duration_ = std::make_unique<DurationModel>(dc, rng);
}

int Model::phoneme_index(const std::string& symbol) const {
  auto it = phoneme_lookup_.find(symbol);
  if (it == phoneme_lookup_.end()) throw std::out_of_range("unknown phoneme '" + symbol + "'");
  return it->second;
}

int Model::speaker_index(const std::string& speaker) const {
  for (std::size_t i = 0; i < speakers_.size(); ++i) {
    if (speakers_[i] == speaker) return static_cast<int>(i);
  }
  throw std::out_of_range("unknown speaker '" + speaker + "'");
}

std::vector<int> Model::phoneme_ids(const std::vector<std::string>& symbols) const {
  std::vector<int> ids;
  ids.reserve(symbols.size());
  for (const auto& s : symbols) ids.push_back(phoneme_index(s));
  return ids;
}

Example Model::prepare(const corpus::Utterance& u) const {
  corpus::validate(u);
  if (u.mel.cols() != mel_bins_) {
    throw ShapeError("utterance '" + u.id + "' has " + std::to_string(u.mel.cols()) +
                     " mel bins, model expects " + std::to_string(mel_bins_));
  }
  Example ex;
  ex.id = u.id;
  ex.speaker = speaker_index(u.speaker_id);
  ex.phoneme_ids = phoneme_ids(u.phonemes);
  ex.align = Alignment::build(u.word_spans, u.durations);
  ex.mel = u.mel;
  return ex;
}

SpeakerTable& Model::duration_speakers() {
  return duration_speakers_ ? *duration_speakers_ : *acoustic_speakers_;
}

const SpeakerTable& Model::duration_speakers() const {
  return duration_speakers_ ? *duration_speakers_ : *acoustic_speakers_;
}

void Model::init_predictor(Index context_dim) {
  PredictorConfig pc;
  pc.context_dim = context_dim;
  pc.speaker_dim = config_.speaker_dim;
  pc.projection_dim = config_.projection_dim;
  pc.lstm_hidden = config_.lstm_hidden;
  pc.acoustic_latent_dim = config_.latent_dim;
  pc.duration_latent_dim = config_.duration_latent_dim;
  nn::Rng rng(config_.seed ^ kPredictorStream);
  predictor_ = std::make_unique<ProsodyPredictor>(pc, rng);
}

ProsodyPredictor& Model::predictor() {
  if (!predictor_) throw std::logic_error("model has no prosody predictor");
  return *predictor_;
}

const ProsodyPredictor& Model::predictor() const {
  if (!predictor_) throw std::logic_error("model has no prosody predictor");
  return *predictor_;
}

std::vector<std::pair<std::string, nn::ParamStore*>> Model::param_groups() {
  std::vector<std::pair<std::string, nn::ParamStore*>> g = {
      {"speakers", &acoustic_speakers_->params()},
      {"acoustic", &acoustic_->decoder_params()},
      {"acoustic_reference", &acoustic_->reference_params()},
      {"duration", &duration_->head_params()},
      {"duration_reference", &duration_->reference_params()},
  };
  if (duration_speakers_) g.insert(g.begin() + 1, {"duration_speakers", &duration_speakers_->params()});
  if (predictor_) g.emplace_back("predictor", &predictor_->params());
  return g;
}

std::vector<std::pair<std::string, const nn::ParamStore*>> Model::param_groups() const {
  std::vector<std::pair<std::string, const nn::ParamStore*>> out;
  for (auto& [name, store] : const_cast<Model*>(this)->param_groups()) out.emplace_back(name, store);
  return out;
}

std::map<std::string, std::uint64_t> Model::stage1_checksums() const {
  std::map<std::string, std::uint64_t> out;
  for (const auto& [name, store] : param_groups()) {
    if (name != "predictor") out[name] = store->checksum();
  }
  return out;
}

void Model::adopt_stage2_settings(const RunConfig& config) {
  if (predictor_) throw std::logic_error("Stage II settings must be set before the predictor exists");
  config_ = config_.with_stage2_settings(config);
}

std::uint64_t Model::fingerprint() const {
  std::uint64_t h = config_.fingerprint();
  for (const auto& [name, store] : param_groups()) {
    const std::uint64_t c = store->checksum();
    h = fnv1a(name.data(), name.size(), h);
    h = fnv1a(&c, sizeof c, h);
  }
  return h;
}

}  // namespace wordpros
