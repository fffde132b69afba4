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

#include "wordpros/pipeline.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "wordpros/binio.h"

namespace wordpros {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kStage2Stream = 0x2545f4914f6cdd1dULL;
constexpr char kMagic[4] = {'W', 'P', 'C', 'K'};

// Optimizer name -> parameter groups it updates, in order.
std::vector<std::string> optimizer_groups(const Model& model, const std::string& name) {
  if (name == "acoustic") return {"acoustic", "acoustic_reference"};
  if (name == "duration") return {"duration", "duration_reference"};
  if (name == "speakers") {
    if (model.config().share_speaker_table) return {"speakers"};
    return {"speakers", "duration_speakers"};
  }
  if (name == "predictor") return {"predictor"};
  throw CheckpointError("unknown optimizer '" + name + "'");
}

optim::Adam make_optimizer(Model& model, const std::string& name, double lr) {
  std::vector<ad::Parameter*> params;
  auto groups = model.param_groups();
  for (const auto& g : optimizer_groups(model, name)) {
    bool found = false;
    for (auto& [gname, store] : groups) {
      if (gname == g) {
        for (auto* p : store->all()) params.push_back(p);
        found = true;
      }
    }
    if (!found) throw CheckpointError("optimizer '" + name + "' needs missing group '" + g + "'");
  }
  optim::AdamOptions o;
  o.learning_rate = lr;
  o.clip_norm = model.config().clip_norm;
  return optim::Adam(std::move(params), o);
}

void add_stage1_optimizers(Checkpoint& ckpt) {
  const double lr = ckpt.model->config().learning_rate;
  for (const char* name : {"acoustic", "duration", "speakers"}) {
    ckpt.state.optimizers.insert_or_assign(name, make_optimizer(*ckpt.model, name, lr));
  }
}

// B distinct indices out of n (all of them, in order, when b >= n).
std::vector<int> pick_batch(nn::Rng& rng, int n, int b) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  if (b >= n) return idx;
  for (int i = 0; i < b; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(static_cast<std::size_t>(b));
  return idx;
}

bool grads_finite(const ad::Gradients& grads, const TrainState& state) {
  for (const auto& [name, opt] : state.optimizers) {
    for (const auto* p : opt.params()) {
      const Matrix* g = grads.find(p);
      if (g != nullptr && !g->allFinite()) return false;
    }
  }
  return true;
}

[[noreturn]] void diverge(const Checkpoint& ckpt, const TrainOptions& options,
                          const std::string& what) {
  std::string msg = "training diverged at step " + std::to_string(ckpt.state.step) + ": " + what;
  if (!options.divergence_checkpoint.empty()) {
    save_checkpoint(ckpt, options.divergence_checkpoint);
    msg += "; last good state saved to " + options.divergence_checkpoint.string();
  }
  throw DivergenceError(msg);
}

Matrix decode_with(const Model& model, std::span<const int> phoneme_ids,
                   const std::vector<corpus::Span>& spans, const std::vector<int>& durations,
                   const Matrix& z, const Matrix& speaker) {
  const Alignment align = Alignment::build(spans, durations);
  align.require_nonempty_words();
  const Matrix enc = model.acoustic().encode_phonemes(phoneme_ids);
  return model.acoustic().decode_mel(upsample(enc, durations), z, speaker, align);
}

MatrixF to_float(const Matrix& m) { return m.cast<float>(); }

std::string stage_name(Stage s) { return s == Stage::kStage1 ? "stage1" : "stage2"; }

}  // namespace

Matrix gaussian_matrix(nn::Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

Checkpoint init_stage1(const RunConfig& config, const corpus::Corpus& corpus) {
  if (corpus.utterances.empty()) throw std::invalid_argument("corpus has no utterances");
  Checkpoint ckpt;
  ckpt.model = std::make_unique<Model>(config, corpus.phoneme_inventory, corpus.speakers,
                                       corpus.utterances.front().mel.cols());
  ckpt.state.stage = Stage::kStage1;
  ckpt.state.step = 0;
  ckpt.state.rng.seed(config.seed);
  add_stage1_optimizers(ckpt);
  return ckpt;
}

std::vector<Example> prepare_examples(const Model& model, const corpus::Corpus& corpus) {
  std::vector<Example> out;
  out.reserve(corpus.utterances.size());
  for (const auto& u : corpus.utterances) {
    out.push_back(model.prepare(u));
    out.back().align.require_nonempty_words();
  }
  return out;
}

// ---- checkpoints -------------------------------------------------------------

void save_checkpoint(const Checkpoint& ckpt, const fs::path& path) {
  const Model& model = *ckpt.model;
  json header;
  header["format"] = "wordpros-checkpoint";
  header["config"] = model.config().to_text();
  header["stage"] = stage_name(ckpt.state.stage);
  header["step"] = ckpt.state.step;
  header["phonemes"] = model.phonemes();
  header["speakers"] = model.speakers();
  header["mel_bins"] = model.mel_bins();
  if (model.has_predictor()) header["context_dim"] = model.predictor().config().context_dim;
  std::ostringstream rng;
  rng << ckpt.state.rng;
  header["rng"] = rng.str();
  json groups = json::array();
  for (const auto& [name, store] : model.param_groups()) {
    json params = json::array();
    for (const auto* p : store->all()) {
      params.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
    }
    groups.push_back({{"name", name}, {"params", params}});
  }
  header["groups"] = groups;
  json opts = json::array();
  for (const auto& [name, opt] : ckpt.state.optimizers) {
    opts.push_back({{"name", name}, {"steps", opt.steps_taken()}});
  }
  header["optimizers"] = opts;

  std::ostringstream body(std::ios::binary);
  const std::string h = header.dump();
  body.write(kMagic, 4);
  binio::write<std::uint32_t>(body, kCheckpointVersion);
  binio::write<std::uint64_t>(body, h.size());
  body.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& [name, store] : model.param_groups()) {
    for (const auto* p : store->all()) binio::write_matrix(body, p->value);
  }
  for (const auto& [name, opt] : ckpt.state.optimizers) {
    for (std::size_t i = 0; i < opt.params().size(); ++i) {
      binio::write_matrix(body, opt.first_moments()[i]);
      binio::write_matrix(body, opt.second_moments()[i]);
    }
  }
  std::string bytes = body.str();
  const std::uint64_t sum = fnv1a(bytes.data(), bytes.size());

  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    binio::write<std::uint64_t>(out, sum);
    if (!out) throw CheckpointError("failed writing checkpoint " + tmp.string());
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = "checkpoint " + path.string() + ": ";
  if (bytes.size() < 4 + 4 + 8 + 8 || bytes.compare(0, 4, kMagic, 4) != 0) {
    throw CheckpointError(where + "not a checkpoint file (bad magic or too short)");
  }
  {
    std::istringstream tail(bytes.substr(bytes.size() - 8), std::ios::binary);
    const auto stored = binio::read<std::uint64_t>(tail);
    if (stored != fnv1a(bytes.data(), bytes.size() - 8)) {
      throw CheckpointError(where + "checksum mismatch (truncated or corrupt)");
    }
  }
  std::istringstream body(bytes.substr(0, bytes.size() - 8), std::ios::binary);
  body.seekg(4);
  try {
    const auto version = binio::read<std::uint32_t>(body);
    if (version != kCheckpointVersion) {
      throw CheckpointError(where + "version " + std::to_string(version) + ", expected " +
                            std::to_string(kCheckpointVersion));
    }
    const auto hlen = binio::read<std::uint64_t>(body);
    if (hlen > bytes.size()) throw CheckpointError(where + "header length out of range");
    std::string h(hlen, '\0');
    if (!body.read(h.data(), static_cast<std::streamsize>(hlen))) {
      throw binio::TruncatedError("header");
    }
    const json header = json::parse(h);

    Checkpoint ckpt;
    const RunConfig config = RunConfig::parse(header.at("config").get<std::string>());
    ckpt.model = std::make_unique<Model>(config, header.at("phonemes").get<std::vector<std::string>>(),
                                         header.at("speakers").get<std::vector<std::string>>(),
                                         header.at("mel_bins").get<Index>());
    if (header.contains("context_dim")) ckpt.model->init_predictor(header["context_dim"].get<Index>());

    auto groups = ckpt.model->param_groups();
    const json& stored_groups = header.at("groups");
    if (stored_groups.size() != groups.size()) {
      throw CheckpointError(where + "parameter groups do not match the stored config");
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const json& sg = stored_groups[g];
      auto params = groups[g].second->all();
      if (sg.at("name").get<std::string>() != groups[g].first ||
          sg.at("params").size() != params.size()) {
        throw CheckpointError(where + "group '" + groups[g].first + "' does not match");
      }
      for (std::size_t i = 0; i < params.size(); ++i) {
        const json& sp = sg["params"][i];
        if (sp.at("name").get<std::string>() != params[i]->name ||
            sp.at("rows").get<Index>() != params[i]->value.rows() ||
            sp.at("cols").get<Index>() != params[i]->value.cols()) {
          throw CheckpointError(where + "dimension mismatch for parameter '" + params[i]->name +
                                "' (stored " + std::to_string(sp.at("rows").get<Index>()) + "x" +
                                std::to_string(sp.at("cols").get<Index>()) + ", model " +
                                shape_str(params[i]->value) + ")");
        }
      }
    }
    for (auto& [name, store] : groups) {
      for (auto* p : store->all()) binio::read_matrix(body, p->value);
    }

    const std::string stage = header.at("stage").get<std::string>();
    if (stage != "stage1" && stage != "stage2") throw CheckpointError(where + "unknown stage");
    ckpt.state.stage = stage == "stage1" ? Stage::kStage1 : Stage::kStage2;
    ckpt.state.step = header.at("step").get<std::int64_t>();
    std::istringstream rng(header.at("rng").get<std::string>());
    rng >> ckpt.state.rng;
    if (!rng) throw CheckpointError(where + "bad random-generator state");
    for (const json& so : header.at("optimizers")) {
      const std::string name = so.at("name").get<std::string>();
      const double lr = name == "predictor" ? config.stage2_learning_rate : config.learning_rate;
      optim::Adam opt = make_optimizer(*ckpt.model, name, lr);
      opt.set_steps_taken(so.at("steps").get<std::int64_t>());
      for (std::size_t i = 0; i < opt.params().size(); ++i) {
        binio::read_matrix(body, opt.first_moments()[i]);
        binio::read_matrix(body, opt.second_moments()[i]);
      }
      ckpt.state.optimizers.insert_or_assign(name, std::move(opt));
    }
    if (body.peek() != std::char_traits<char>::eof()) {
      throw CheckpointError(where + "trailing bytes after payload");
    }
    return ckpt;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(where + e.what());
  }
}

// ---- Stage I -----------------------------------------------------------------

std::vector<Stage1Log> train_stage1(Checkpoint& ckpt, const std::vector<Example>& data,
                                    const TrainOptions& options) {
  if (ckpt.state.stage != Stage::kStage1) {
    throw std::logic_error("train_stage1 needs a Stage I training state");
  }
  if (data.empty()) throw std::invalid_argument("train_stage1: no training examples");
  Model& model = *ckpt.model;
  TrainState& state = ckpt.state;
  const RunConfig& cfg = model.config();
  const std::int64_t until = options.until_step < 0 ? cfg.steps : options.until_step;
  const ReconScale acoustic_scale{cfg.acoustic_recon_variance};
  const ReconScale duration_scale{cfg.duration_recon_variance};
  const Index H = cfg.latent_dim, HD = cfg.duration_latent_dim;
  const int B = std::min<int>(cfg.batch_size, static_cast<int>(data.size()));

  std::vector<Stage1Log> logs;
  while (state.step < until) {
    Stage1Log log;
    log.step = state.step;
    log.alpha = dist::anneal_alpha(state.step, cfg.anneal);
    const std::vector<int> batch = pick_batch(state.rng, static_cast<int>(data.size()), B);
    ad::Gradients grads;
    try {
      for (int i : batch) {
        const Example& ex = data[i];
        const Index W = ex.align.n_words();
        const Matrix noise_a = gaussian_matrix(state.rng, W, H);
        const Matrix noise_d = gaussian_matrix(state.rng, W, HD);
        {
          ad::Tape tape;
          const LossValue l = acoustic_loss(tape, model.acoustic(), model.acoustic_speakers(), ex,
                                            log.alpha, noise_a, acoustic_scale);
          tape.backward(l.total, grads);
          log.acoustic_recon += l.recon;
          log.acoustic_kl += l.kl;
          log.acoustic_mse += l.recon_mse;
        }
        {
          ad::Tape tape;
          const LossValue l = duration_loss(tape, model.duration(), model.duration_speakers(), ex,
                                            log.alpha, noise_d, duration_scale);
          tape.backward(l.total, grads);
          log.duration_recon += l.recon;
          log.duration_kl += l.kl;
          log.duration_mse += l.recon_mse;
        }
      }
    } catch (const std::runtime_error& e) {
      diverge(ckpt, options, e.what());
    }
    grads.scale(1.0 / B);
    if (!grads_finite(grads, state)) diverge(ckpt, options, "non-finite gradient");
    for (auto& [name, opt] : state.optimizers) opt.step(grads);
    ++state.step;

    for (double* v : {&log.acoustic_recon, &log.acoustic_kl, &log.acoustic_mse, &log.duration_recon,
                      &log.duration_kl, &log.duration_mse}) {
      *v /= B;
    }
    logs.push_back(log);
    if (options.on_stage1_log &&
        (log.step % cfg.log_every == 0 || state.step == until || logs.size() == 1)) {
      options.on_stage1_log(log);
    }
  }
  return logs;
}

// ---- Stage II ----------------------------------------------------------------

Posteriors encode_posteriors(const Model& model, const Example& ex) {
  const Matrix enc_a = model.acoustic().encode_phonemes(ex.phoneme_ids);
  const Matrix enc_d = model.duration().encode_phonemes(ex.phoneme_ids);
  Posteriors p;
  p.acoustic = model.acoustic().encode_acoustic_reference(
      ex.mel, enc_a, model.acoustic_speakers().embedding(ex.speaker), ex.align);
  p.duration = model.duration().encode_duration_reference(
      ex.mel, enc_d, model.duration_speakers().embedding(ex.speaker), ex.align);
  return p;
}

ProsodyTargetStore dump_targets(const Model& model, const corpus::Corpus& corpus) {
  ProsodyTargetStore store;
  for (const auto& u : corpus.utterances) {
    try {
      const Example ex = model.prepare(u);
      ex.align.require_nonempty_words();
      const Posteriors p = encode_posteriors(model, ex);
      p.acoustic.validate();
      p.duration.validate();
      ProsodyTarget t;
      t.id = u.id;
      t.speaker_id = u.speaker_id;
      t.acoustic_mean = to_float(p.acoustic.mean);
      t.acoustic_var = to_float(p.acoustic.var);
      t.duration_mean = to_float(p.duration.mean);
      t.duration_var = to_float(p.duration.var);
      store.add(std::move(t));
    } catch (const std::exception& e) {
      throw std::runtime_error("dump_targets: utterance '" + u.id + "': " + e.what());
    }
  }
  return store;
}

Stage2Data prepare_stage2(const Model& model, const corpus::Corpus& corpus,
                          const ProsodyTargetStore& targets, const ContextEmbedder& embedder) {
  Stage2Data d;
  for (const auto& u : corpus.utterances) {
    const ProsodyTarget* t = targets.find(u.id);
    if (t == nullptr) throw std::invalid_argument("no prosody target for utterance '" + u.id + "'");
    if (t->n_words() != u.n_words()) {
      throw std::invalid_argument("target for '" + u.id + "' has " + std::to_string(t->n_words()) +
                                  " words, corpus has " + std::to_string(u.n_words()));
    }
    d.inputs.words.push_back(pool_to_words(embed_context(u.text, embedder, u.n_words())));
    d.inputs.speakers.push_back(
        model.acoustic_speakers().embedding(model.speaker_index(u.speaker_id)));
    d.targets.push_back(t);
    d.ids.push_back(u.id);
  }
  if (d.ids.empty()) throw std::invalid_argument("prepare_stage2: empty corpus");
  return d;
}

void init_stage2(Checkpoint& ckpt, Index context_dim) {
  Model& model = *ckpt.model;
  model.init_predictor(context_dim);
  ckpt.state.stage = Stage::kStage2;
  ckpt.state.step = 0;
  ckpt.state.rng.seed(model.config().seed ^ kStage2Stream);
  ckpt.state.optimizers.clear();
  ckpt.state.optimizers.emplace(
      "predictor", make_optimizer(model, "predictor", model.config().stage2_learning_rate));
}

namespace {

PredictorBatch subset(const PredictorBatch& all, const std::vector<int>& idx) {
  PredictorBatch b;
  for (int i : idx) {
    b.words.push_back(all.words[i]);
    b.speakers.push_back(all.speakers[i]);
  }
  return b;
}

}  // namespace

double evaluate_stage2(const Model& model, const Stage2Data& data) {
  ad::Tape tape;
  const PredictorOutputs out = model.predictor().forward(tape, data.inputs);
  return predictor_loss(out, data.targets).value()(0, 0) / static_cast<double>(data.ids.size());
}

std::vector<double> train_stage2(Checkpoint& ckpt, const Stage2Data& data,
                                 const TrainOptions& options) {
  Model& model = *ckpt.model;
  TrainState& state = ckpt.state;
  if (state.stage != Stage::kStage2 || !model.has_predictor()) {
    throw std::logic_error("train_stage2 needs a Stage II training state (call init_stage2)");
  }
  const RunConfig& cfg = model.config();
  const int N = static_cast<int>(data.ids.size());
  const int B = cfg.stage2_batch_size == 0 ? N : std::min(cfg.stage2_batch_size, N);
  const std::int64_t until = options.until_step < 0 ? cfg.stage2_steps : options.until_step;
  optim::Adam& opt = state.optimizers.at("predictor");
  std::vector<double> losses;
  while (state.step < until) {
    double lr = cfg.stage2_learning_rate;
    if (cfg.stage2_lr_schedule == "cosine" && cfg.stage2_steps > 0) {
      const double frac = std::min(1.0, static_cast<double>(state.step) /
                                            static_cast<double>(cfg.stage2_steps));
      lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
    }
    const std::vector<int> idx = pick_batch(state.rng, N, B);
    std::vector<const ProsodyTarget*> targets;
    for (int i : idx) targets.push_back(data.targets[i]);
    ad::Tape tape;
    const PredictorOutputs out =
        model.predictor().forward(tape, B == N ? data.inputs : subset(data.inputs, idx));
    ad::Var loss = ad::scale(predictor_loss(out, targets), 1.0 / B);
    const double value = loss.value()(0, 0);
    if (!std::isfinite(value)) diverge(ckpt, options, "non-finite predictor loss");
    ad::Gradients grads;
    tape.backward(loss, grads);
    if (!grads_finite(grads, state)) diverge(ckpt, options, "non-finite gradient");
    opt.step(grads, lr);
    losses.push_back(value);
    ++state.step;
    if (options.on_stage2_log &&
        ((state.step - 1) % cfg.log_every == 0 || state.step == until)) {
      options.on_stage2_log(state.step - 1, value, lr);
    }
  }
  return losses;
}

// ---- inference ---------------------------------------------------------------

Synthesis infer_fpt(const Model& model, const corpus::Utterance& reference,
                    const std::string& target_speaker) {
  const int target = model.speaker_index(target_speaker);
  const Example ex = model.prepare(reference);
  ex.align.require_nonempty_words();
  const Posteriors post = encode_posteriors(model, ex);
  Synthesis s;
  s.z = post.acoustic.mean;
  s.z_duration = post.duration.mean;
  s.durations = quantize_durations(model.duration().predict_durations(
      ex.phoneme_ids, model.duration_speakers().embedding(target), s.z_duration,
      ex.align.word_spans));
  s.mel = decode_with(model, ex.phoneme_ids, ex.align.word_spans, s.durations, s.z,
                      model.acoustic_speakers().embedding(target));
  return s;
}

Synthesis infer_tts(const Model& model, const ContextEmbedder& embedder, const TtsInput& input,
                    const std::string& speaker, SampleMode mode, double temperature,
                    nn::Rng* rng) {
  if (!model.has_predictor()) throw MissingPredictorError();
  if (!(temperature >= 0)) throw std::invalid_argument("temperature must be non-negative");
  const int spk = model.speaker_index(speaker);
  const std::vector<corpus::Span> spans = corpus::build_word_spans(input.word_lengths);
  const std::vector<int> ids = model.phoneme_ids(input.phonemes);
  if (spans.empty() || spans.back().second != static_cast<int>(ids.size())) {
    throw std::invalid_argument("TTS input '" + input.id + "': word lengths cover " +
                                std::to_string(spans.empty() ? 0 : spans.back().second) +
                                " phonemes, got " + std::to_string(ids.size()));
  }
  const Matrix words =
      pool_to_words(embed_context(input.text, embedder, static_cast<int>(spans.size())));
  if (words.cols() != model.predictor().config().context_dim) {
    throw ShapeError("context embeddings are " + std::to_string(words.cols()) +
                     " wide, predictor expects " +
                     std::to_string(model.predictor().config().context_dim));
  }
  const ProsodyPrediction pred =
      model.predictor().predict_prosody(words, model.acoustic_speakers().embedding(spk));
  Synthesis s;
  s.z = pred.acoustic.mean;
  s.z_duration = pred.duration.mean;
  if (mode == SampleMode::kSample && temperature > 0) {
    if (rng == nullptr) throw std::invalid_argument("sample mode needs a random generator");
    const Matrix na = gaussian_matrix(*rng, s.z.rows(), s.z.cols());
    const Matrix nd = gaussian_matrix(*rng, s.z_duration.rows(), s.z_duration.cols());
    s.z += temperature * pred.acoustic.var.cwiseSqrt().cwiseProduct(na);
    s.z_duration += temperature * pred.duration.var.cwiseSqrt().cwiseProduct(nd);
  }
  s.durations = quantize_durations(model.duration().predict_durations(
      ids, model.duration_speakers().embedding(spk), s.z_duration, spans));
  s.mel = decode_with(model, ids, spans, s.durations, s.z, model.acoustic_speakers().embedding(spk));
  return s;
}

Matrix copy_synthesis(const Model& model, const Example& ex) {
  const Posteriors post = encode_posteriors(model, ex);
  return decode_with(model, ex.phoneme_ids, ex.align.word_spans, ex.align.durations,
                     post.acoustic.mean, model.acoustic_speakers().embedding(ex.speaker));
}

Matrix tts_aligned(const Model& model, const ContextEmbedder& embedder,
                   const corpus::Utterance& u) {
  if (!model.has_predictor()) throw MissingPredictorError();
  const Example ex = model.prepare(u);
  const Matrix spk = model.acoustic_speakers().embedding(ex.speaker);
  const Matrix words = pool_to_words(embed_context(u.text, embedder, u.n_words()));
  const ProsodyPrediction pred = model.predictor().predict_prosody(words, spk);
  return decode_with(model, ex.phoneme_ids, ex.align.word_spans, ex.align.durations,
                     pred.acoustic.mean, spk);
}

Matrix prior_synthesis(const Model& model, const Example& ex, nn::Rng& rng) {
  const Matrix z = gaussian_matrix(rng, ex.align.n_words(), model.config().latent_dim);
  return decode_with(model, ex.phoneme_ids, ex.align.word_spans, ex.align.durations, z,
                     model.acoustic_speakers().embedding(ex.speaker));
}

}  // namespace wordpros
