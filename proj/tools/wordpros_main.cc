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

// Command-line front end: corpus generation, both training stages, target
// dumping, the two inference modes and evaluation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wordpros/evalkit.h"
#include "wordpros/kvconfig.h"
#include "wordpros/pipeline.h"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace wordpros;

namespace {

void write_synthesis(const Synthesis& s, const fs::path& dir, const std::string& id,
                     json sidecar) {
  fs::create_directories(dir);
  const fs::path mel = dir / (id + ".f32");
  corpus::write_mel_f32(s.mel, mel);
  sidecar["id"] = id;
  sidecar["mel_file"] = mel.filename().string();
  sidecar["n_frames"] = s.mel.rows();
  sidecar["n_bins"] = s.mel.cols();
  sidecar["durations"] = s.durations;
  std::ofstream out(dir / (id + ".json"), std::ios::trunc);
  out << sidecar.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write sidecar in " + dir.string());
}

void print_stage1(const Stage1Log& l) {
  std::printf(
      "step=%lld alpha=%.6f acoustic_recon=%.6g acoustic_kl=%.6g acoustic_mse=%.6g "
      "duration_recon=%.6g duration_kl=%.6g duration_mse=%.6g\n",
      static_cast<long long>(l.step), l.alpha, l.acoustic_recon, l.acoustic_kl, l.acoustic_mse,
      l.duration_recon, l.duration_kl, l.duration_mse);
  std::fflush(stdout);
}

corpus::Corpus load_config_corpus(const RunConfig& cfg) {
  if (cfg.corpus.empty()) throw ConfigError("config: corpus is not set");
  return corpus::load_corpus(cfg.corpus);
}

int gen_corpus(const fs::path& spec_file, const fs::path& out) {
  const auto spec = corpus::load_synth_spec(spec_file);
  const auto sc = corpus::generate_synthetic_corpus(spec);
  corpus::save_corpus(sc.corpus, out, &sc.truth);
  std::printf("wrote %zu utterances from %zu speakers to %s\n", sc.corpus.utterances.size(),
              sc.corpus.speakers.size(), out.string().c_str());
  return 0;
}

int train_stage1_cmd(const fs::path& config_file, const fs::path& out, const fs::path& resume) {
  const RunConfig cfg = RunConfig::load(config_file);
  const corpus::Corpus corpus = load_config_corpus(cfg);
  Checkpoint ckpt = resume.empty() ? init_stage1(cfg, corpus) : load_checkpoint(resume);
  if (!resume.empty() && ckpt.state.stage != Stage::kStage1) {
    throw std::runtime_error("resume checkpoint is not a Stage I checkpoint");
  }
  const std::vector<Example> data = prepare_examples(*ckpt.model, corpus);
  TrainOptions opts;
  opts.on_stage1_log = print_stage1;
  opts.divergence_checkpoint = fs::path(out.string() + ".last_good");
  train_stage1(ckpt, data, opts);
  save_checkpoint(ckpt, out);
  std::printf("saved Stage I checkpoint at step %lld to %s\n",
              static_cast<long long>(ckpt.state.step), out.string().c_str());
  return 0;
}

int dump_targets_cmd(const fs::path& ckpt_file, const fs::path& corpus_dir, const fs::path& out) {
  const Checkpoint ckpt = load_checkpoint(ckpt_file);
  const corpus::Corpus corpus = corpus::load_corpus(corpus_dir);
  const ProsodyTargetStore store = dump_targets(*ckpt.model, corpus);
  store.save(out);
  std::printf("wrote %zu prosody targets to %s\n", store.size(), out.string().c_str());
  return 0;
}

int train_stage2_cmd(const fs::path& config_file, const fs::path& stage1, const fs::path& targets,
                     const fs::path& out) {
  const RunConfig cfg = RunConfig::load(config_file);
  Checkpoint ckpt = load_checkpoint(stage1);
  ckpt.model->adopt_stage2_settings(cfg);
  const corpus::Corpus corpus = load_config_corpus(cfg);
  const ProsodyTargetStore store = ProsodyTargetStore::load(targets);
  const auto embedder = make_embedder(ckpt.model->config());
  const auto before = ckpt.model->stage1_checksums();
  init_stage2(ckpt, embedder->dim());
  const Stage2Data data = prepare_stage2(*ckpt.model, corpus, store, *embedder);
  TrainOptions opts;
  opts.on_stage2_log = [](std::int64_t step, double loss, double lr) {
    std::printf("step=%lld predictor_loss=%.6g lr=%.6g\n", static_cast<long long>(step), loss, lr);
    std::fflush(stdout);
  };
  opts.divergence_checkpoint = fs::path(out.string() + ".last_good");
  train_stage2(ckpt, data, opts);
  if (ckpt.model->stage1_checksums() != before) {
    throw std::logic_error("Stage I parameters changed during Stage II");
  }
  save_checkpoint(ckpt, out);
  std::printf("saved Stage II checkpoint to %s\n", out.string().c_str());
  return 0;
}

int infer_tts_cmd(const fs::path& ckpt_file, const fs::path& input, const std::string& speaker,
                  const fs::path& out, const std::string& mode, double temperature,
                  std::uint64_t seed) {
  const Checkpoint ckpt = load_checkpoint(ckpt_file);
  if (!ckpt.model->has_predictor()) throw MissingPredictorError();
  const auto embedder = make_embedder(ckpt.model->config());
  if (mode != "mean" && mode != "sample") throw std::invalid_argument("--mode must be mean or sample");
  const SampleMode m = mode == "mean" ? SampleMode::kMean : SampleMode::kSample;
  nn::Rng rng(seed);
  std::ifstream in(input);
  if (!in) throw std::runtime_error("cannot open " + input.string());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line);
    TtsInput t;
    t.text = j.at("text").get<std::string>();
    t.phonemes = j.at("phonemes").get<std::vector<std::string>>();
    t.word_lengths = j.at("word_lengths").get<std::vector<int>>();
    t.id = j.value("id", "tts_" + std::to_string(n));
    const Synthesis s = infer_tts(*ckpt.model, *embedder, t, speaker, m, temperature, &rng);
    write_synthesis(s, out, t.id,
                    {{"mode", mode}, {"temperature", temperature}, {"speaker", speaker},
                     {"text", t.text}});
    ++n;
  }
  std::printf("synthesised %d utterances into %s\n", n, out.string().c_str());
  return 0;
}

int infer_fpt_cmd(const fs::path& ckpt_file, const std::string& reference,
                  const fs::path& corpus_dir, const std::string& speaker, const fs::path& out) {
  const Checkpoint ckpt = load_checkpoint(ckpt_file);
  const corpus::Corpus corpus = corpus::load_corpus(corpus_dir);
  const corpus::Utterance* ref = corpus.find(reference);
  if (ref == nullptr) throw std::invalid_argument("no utterance '" + reference + "' in corpus");
  const Synthesis s = infer_fpt(*ckpt.model, *ref, speaker);
  const std::string id = reference + "_as_" + speaker;
  write_synthesis(s, out, id,
                  {{"reference", reference}, {"source_speaker", ref->speaker_id},
                   {"speaker", speaker}});
  std::printf("wrote %s (%lld frames)\n", (out / (id + ".f32")).string().c_str(),
              static_cast<long long>(s.mel.rows()));
  return 0;
}

int eval_cmd(const fs::path& ckpt_file, const fs::path& corpus_dir, const fs::path& report_file,
             bool plots, int pairs, std::uint64_t seed) {
  const Checkpoint ckpt = load_checkpoint(ckpt_file);
  const corpus::Corpus corpus = corpus::load_corpus(corpus_dir);
  std::unique_ptr<ContextEmbedder> embedder;
  if (ckpt.model->has_predictor()) embedder = make_embedder(ckpt.model->config());
  eval::EvalOptions opts;
  opts.fpt_pairs = pairs;
  opts.seed = seed;
  opts.probe.seed = seed;
  const eval::EvalReport report = eval::evaluate(*ckpt.model, corpus, embedder.get(), opts);
  const auto images = eval::emit_report(report, report_file, plots);
  for (const auto& m : report.metrics) {
    std::printf("%-34s %s (n=%zu)\n", m.name.c_str(),
                m.defined ? std::to_string(m.value).c_str() : "undefined", m.count);
  }
  for (const auto& img : images) std::printf("plot: %s\n", img.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-level prosody model: two-stage training, transfer and TTS inference"};
  app.require_subcommand(1);

  fs::path spec, out, config, ckpt, corpus_dir, targets, stage1, input, report, resume;
  std::string speaker, reference, mode = "mean";
  double temperature = 1.0;
  std::uint64_t seed = 1;
  bool plots = false;
  int pairs = 40;

  auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic multi-speaker corpus");
  gen->add_option("--spec", spec, "Synthetic corpus spec (key = value)")->required();
  gen->add_option("--out", out, "Output corpus directory")->required();

  auto* s1 = app.add_subcommand("train-stage1", "Train the acoustic and duration models");
  s1->add_option("--config", config, "Run config (key = value)")->required();
  s1->add_option("--out", out, "Output checkpoint")->required();
  s1->add_option("--resume", resume, "Continue from a Stage I checkpoint");

  auto* dump = app.add_subcommand("dump-targets", "Write Stage I posteriors for every utterance");
  dump->add_option("--ckpt", ckpt, "Stage I checkpoint")->required();
  dump->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  dump->add_option("--out", out, "Output target store")->required();

  auto* s2 = app.add_subcommand("train-stage2", "Train the prosody predictor");
  s2->add_option("--config", config, "Run config (key = value)")->required();
  s2->add_option("--stage1", stage1, "Stage I checkpoint")->required();
  s2->add_option("--targets", targets, "Target store from dump-targets")->required();
  s2->add_option("--out", out, "Output checkpoint")->required();

  auto* tts = app.add_subcommand("infer-tts", "Synthesise mels from text with predicted prosody");
  tts->add_option("--ckpt", ckpt, "Stage II checkpoint")->required();
  tts->add_option("--input", input, "JSONL: {id, text, phonemes, word_lengths}")->required();
  tts->add_option("--speaker", speaker, "Speaker id")->required();
  tts->add_option("--out", out, "Output directory")->required();
  tts->add_option("--mode", mode, "mean or sample")->capture_default_str();
  tts->add_option("--temperature", temperature, "Sampling temperature")->capture_default_str();
  tts->add_option("--seed", seed, "Sampling seed")->capture_default_str();

  auto* fpt = app.add_subcommand("infer-fpt", "Transfer a recording's prosody to another speaker");
  fpt->add_option("--ckpt", ckpt, "Checkpoint")->required();
  fpt->add_option("--reference", reference, "Reference utterance id")->required();
  fpt->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  fpt->add_option("--speaker", speaker, "Target speaker id")->required();
  fpt->add_option("--out", out, "Output directory")->required();

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint and write a JSON report");
  ev->add_option("--ckpt", ckpt, "Checkpoint")->required();
  ev->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  ev->add_option("--report", report, "Output JSON report")->required();
  ev->add_flag("--plots", plots, "Also write box-plot PNGs next to the report");
  ev->add_option("--pairs", pairs, "Number of transfer pairs")->capture_default_str();
  ev->add_option("--seed", seed, "Seed for pairs and probe splits")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return gen_corpus(spec, out);
    if (*s1) return train_stage1_cmd(config, out, resume);
    if (*dump) return dump_targets_cmd(ckpt, corpus_dir, out);
    if (*s2) return train_stage2_cmd(config, stage1, targets, out);
    if (*tts) return infer_tts_cmd(ckpt, input, speaker, out, mode, temperature, seed);
    if (*fpt) return infer_fpt_cmd(ckpt, reference, corpus_dir, speaker, out);
    if (*ev) return eval_cmd(ckpt, corpus_dir, report, plots, pairs, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
