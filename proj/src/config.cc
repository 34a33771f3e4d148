// config.cc

// Copyright 2026  spkdino authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "config.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "text.h"

namespace spkdino {

namespace {

void ParseValue(std::string_view s, std::string_view key, int* out) {
  int64_t v = ParseInt(s, key);
  if (v < INT32_MIN || v > INT32_MAX) Fail(ErrorCode::kInvalidArgument, key, " out of range");
  *out = static_cast<int>(v);
}
void ParseValue(std::string_view s, std::string_view key, uint64_t* out) {
  *out = ParseUint(s, key);
}
void ParseValue(std::string_view s, std::string_view key, double* out) {
  *out = ParseDouble(s, key);
}
void ParseValue(std::string_view s, std::string_view key, bool* out) {
  s = Trim(s);
  if (s == "true" || s == "1") *out = true;
  else if (s == "false" || s == "0") *out = false;
  else Fail(ErrorCode::kInvalidArgument, "invalid boolean for ", key, ": '", s, "'");
}
void ParseValue(std::string_view s, std::string_view, std::string* out) {
  *out = std::string(Trim(s));
}
void ParseValue(std::string_view s, std::string_view key, std::vector<double>* out) {
  out->clear();
  s = Trim(s);
  if (s.empty()) return;
  for (const auto& f : Split(s, ',')) out->push_back(ParseDouble(f, key));
}
// "5:1,3:2,3:3" -> kernel:dilation pairs.
void ParseValue(std::string_view s, std::string_view key, std::vector<TdnnSpec>* out) {
  out->clear();
  for (const auto& f : Split(Trim(s), ',')) {
    auto kd = Split(f, ':');
    if (kd.size() != 2) Fail(ErrorCode::kInvalidArgument, key, ": expected kernel:dilation, got '", f, "'");
    int k = 0, d = 0;
    ParseValue(kd[0], key, &k);
    ParseValue(kd[1], key, &d);
    out->push_back({k, d});
  }
}
void ParseValue(std::string_view s, std::string_view key, RunMode* out) {
  s = Trim(s);
  if (s == "dino_pretrain") *out = RunMode::kDinoPretrain;
  else if (s == "aam_finetune") *out = RunMode::kAamFinetune;
  else Fail(ErrorCode::kInvalidArgument, key, " must be dino_pretrain or aam_finetune, got '", s, "'");
}

std::string FormatValue(int v) { return std::to_string(v); }
std::string FormatValue(uint64_t v) { return std::to_string(v); }
std::string FormatValue(double v) { return FormatDouble(v); }
std::string FormatValue(bool v) { return v ? "true" : "false"; }
std::string FormatValue(const std::string& v) { return v; }
std::string FormatValue(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + FormatDouble(v[i]);
  return s;
}
std::string FormatValue(const std::vector<TdnnSpec>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + std::to_string(v[i].kernel) + ":" + std::to_string(v[i].dilation);
  return s;
}
std::string FormatValue(RunMode m) {
  return m == RunMode::kDinoPretrain ? "dino_pretrain" : "aam_finetune";
}

template <typename T, typename Access>
ConfigKey Bind(std::string name, std::string doc, Access access) {
  ConfigKey key;
  key.name = name;
  key.doc = std::move(doc);
  key.set = [access, name](RunConfig& c, std::string_view v) {
    T* field = &access(c);
    ParseValue(v, name, field);
  };
  key.get = [access](const RunConfig& c) {
    return FormatValue(static_cast<const T&>(access(const_cast<RunConfig&>(c))));
  };
  return key;
}

#define SPKDINO_KEY(type, name, doc, expr) \
  Bind<type>(name, doc, [](RunConfig& c) -> type& { return expr; })

std::vector<ConfigKey> BuildKeys() {
  std::vector<ConfigKey> k;
  k.push_back(SPKDINO_KEY(RunMode, "mode", "dino_pretrain or aam_finetune", c.mode));
  k.push_back(SPKDINO_KEY(uint64_t, "seed", "master seed of the run", c.seed));

  k.push_back(SPKDINO_KEY(std::string, "corpus.manifest", "training manifest; empty synthesises one", c.corpus.manifest));
  k.push_back(SPKDINO_KEY(int, "corpus.speakers", "synthetic training speakers", c.corpus.speakers));
  k.push_back(SPKDINO_KEY(int, "corpus.utts_per_speaker", "synthetic utterances per speaker", c.corpus.utts_per_speaker));
  k.push_back(SPKDINO_KEY(double, "corpus.duration", "synthetic utterance length in seconds", c.corpus.duration));
  k.push_back(SPKDINO_KEY(uint64_t, "corpus.seed", "synthetic corpus seed", c.corpus.seed));
  k.push_back(SPKDINO_KEY(int, "corpus.sample_rate", "synthetic sample rate", c.corpus.sample_rate));

  k.push_back(SPKDINO_KEY(double, "aug.p_pitch", "pitch shift probability per utterance", c.augment.p_pitch));
  k.push_back(SPKDINO_KEY(std::vector<double>, "aug.pitch_cents", "pitch shift choices in cents", c.augment.pitch_cents));
  k.push_back(SPKDINO_KEY(double, "aug.p_tempo", "tempo change probability per segment", c.augment.p_tempo));
  k.push_back(SPKDINO_KEY(std::vector<double>, "aug.tempo_ratios", "tempo ratio choices", c.augment.tempo_ratios));
  k.push_back(SPKDINO_KEY(double, "aug.p_noise_reverb", "noise or reverb probability per segment", c.augment.p_noise_reverb));
  k.push_back(SPKDINO_KEY(double, "aug.snr_low", "lowest SNR in dB", c.augment.snr_low_db));
  k.push_back(SPKDINO_KEY(double, "aug.snr_high", "highest SNR in dB", c.augment.snr_high_db));
  k.push_back(SPKDINO_KEY(std::string, "aug.noise_manifest", "noise recordings; empty generates a bank", c.augment.noise_manifest));
  k.push_back(SPKDINO_KEY(std::string, "aug.ir_manifest", "impulse responses; empty generates a bank", c.augment.ir_manifest));
  k.push_back(SPKDINO_KEY(int, "aug.bank_size", "size of each generated bank", c.augment.bank_size));
  k.push_back(SPKDINO_KEY(uint64_t, "aug.bank_seed", "seed of the generated banks", c.augment.bank_seed));

  k.push_back(SPKDINO_KEY(int, "seg.n_long", "long views per utterance", c.segments.n_long));
  k.push_back(SPKDINO_KEY(double, "seg.long_seconds", "long view length", c.segments.long_seconds));
  k.push_back(SPKDINO_KEY(int, "seg.n_short", "short views per utterance", c.segments.n_short));
  k.push_back(SPKDINO_KEY(double, "seg.short_seconds", "short view length", c.segments.short_seconds));

  k.push_back(SPKDINO_KEY(int, "feat.n_mels", "mel bands", c.features.n_mels));
  k.push_back(SPKDINO_KEY(double, "feat.win_seconds", "analysis window", c.features.win_seconds));
  k.push_back(SPKDINO_KEY(double, "feat.hop_seconds", "frame hop", c.features.hop_seconds));
  k.push_back(SPKDINO_KEY(double, "feat.low_hz", "lowest filterbank frequency", c.features.low_hz));
  k.push_back(SPKDINO_KEY(bool, "feat.mean_norm", "per-utterance mean subtraction", c.features.mean_norm));

  k.push_back(SPKDINO_KEY(int, "model.channels", "time-delay layer width", c.model.channels));
  k.push_back(SPKDINO_KEY(std::vector<TdnnSpec>, "model.tdnn", "kernel:dilation per time-delay layer", c.model.tdnn));
  k.push_back(SPKDINO_KEY(int, "model.embed_dim", "embedding size", c.model.embed_dim));
  k.push_back(SPKDINO_KEY(int, "model.head_hidden", "projection head width", c.model.head_hidden));
  k.push_back(SPKDINO_KEY(int, "model.head_layers", "GELU layers in the head", c.model.head_layers));
  k.push_back(SPKDINO_KEY(bool, "model.data_init", "standardise every layer on a probe batch after random init", c.data_init));
  k.push_back(SPKDINO_KEY(int, "model.bottleneck", "bottleneck size", c.model.bottleneck));
  k.push_back(SPKDINO_KEY(int, "model.k", "output dimension K", c.model.k));

  k.push_back(SPKDINO_KEY(double, "dino.tau_s", "student temperature", c.dino.tau_s));
  k.push_back(SPKDINO_KEY(double, "dino.tau_t_start", "teacher temperature at step 0", c.dino.tau_t_start));
  k.push_back(SPKDINO_KEY(double, "dino.tau_t_end", "teacher temperature after warm-up", c.dino.tau_t_end));
  k.push_back(SPKDINO_KEY(double, "dino.tau_t_warm_fraction", "share of steps spent warming the teacher temperature", c.dino.tau_t_warm_fraction));
  k.push_back(SPKDINO_KEY(double, "dino.center_momentum", "center EMA momentum", c.dino.center_momentum));
  k.push_back(SPKDINO_KEY(double, "dino.lambda_start", "teacher EMA coefficient at step 0", c.dino.lambda_start));
  k.push_back(SPKDINO_KEY(double, "dino.lambda_end", "teacher EMA coefficient at the last step", c.dino.lambda_end));
  k.push_back(SPKDINO_KEY(bool, "dino.centering", "subtract the running center from teacher outputs", c.dino.centering));

  k.push_back(SPKDINO_KEY(double, "optim.lr_start", "learning rate at step 0", c.lr_start));
  k.push_back(SPKDINO_KEY(double, "optim.lr_end", "learning rate at the last step", c.lr_end));
  k.push_back(SPKDINO_KEY(double, "optim.momentum", "SGD momentum", c.momentum));
  k.push_back(SPKDINO_KEY(double, "optim.weight_decay", "L2 penalty on weight tensors (not biases)", c.weight_decay));
  k.push_back(SPKDINO_KEY(int, "train.epochs", "passes over the corpus", c.epochs));
  k.push_back(SPKDINO_KEY(int, "train.batch_size", "utterances per step", c.batch_size));
  k.push_back(SPKDINO_KEY(int, "train.checkpoint_every", "epochs between checkpoints; 0 keeps only the final one", c.checkpoint_every));

  k.push_back(SPKDINO_KEY(std::string, "finetune.init", "checkpoint to start from; empty for random init", c.finetune_init));
  k.push_back(SPKDINO_KEY(double, "finetune.label_fraction", "labelled share of each speaker's utterances", c.label_fraction));
  k.push_back(SPKDINO_KEY(double, "aam.margin", "additive angular margin", c.aam.margin));
  k.push_back(SPKDINO_KEY(double, "aam.scale", "logit scale", c.aam.scale));
  k.push_back(SPKDINO_KEY(int, "aam.n_classes", "expected labelled speakers; 0 takes the count from the data", c.aam.n_classes));

  k.push_back(SPKDINO_KEY(std::string, "eval.manifest", "evaluation manifest; empty synthesises held-out speakers", c.eval_corpus.manifest));
  k.push_back(SPKDINO_KEY(int, "eval.speakers", "synthetic evaluation speakers", c.eval_corpus.speakers));
  k.push_back(SPKDINO_KEY(int, "eval.utts_per_speaker", "synthetic evaluation utterances per speaker", c.eval_corpus.utts_per_speaker));
  k.push_back(SPKDINO_KEY(double, "eval.duration", "synthetic evaluation utterance length", c.eval_corpus.duration));
  k.push_back(SPKDINO_KEY(uint64_t, "eval.seed", "synthetic evaluation corpus seed", c.eval_corpus.seed));
  k.push_back(SPKDINO_KEY(int, "eval.sample_rate", "synthetic evaluation sample rate", c.eval_corpus.sample_rate));
  k.push_back(SPKDINO_KEY(std::string, "eval.trials", "trial list; empty uses every pair", c.trials));
  k.push_back(SPKDINO_KEY(uint64_t, "eval.trials_seed", "seed for generated trial lists", c.trials_seed));
  k.push_back(SPKDINO_KEY(int, "eval.cohort_size", "training utterances in the score normalisation cohort", c.cohort_size));
  k.push_back(SPKDINO_KEY(int, "eval.asnorm_top_n", "top cohort scores kept by AS-norm", c.asnorm_top_n));
  k.push_back(SPKDINO_KEY(std::string, "eval.nmi_normalization", "arithmetic, geometric or max", c.nmi_normalization));
  return k;
}

#undef SPKDINO_KEY

const ConfigKey& FindKey(std::string_view name) {
  for (const auto& k : ConfigKeys())
    if (k.name == name) return k;
  Fail(ErrorCode::kInvalidArgument, "unknown config key '", name, "'");
}

void ValidateCorpus(const CorpusSpec& c, const char* what) {
  if (!c.manifest.empty()) return;
  if (c.speakers < 2) Fail(ErrorCode::kInvalidArgument, what, ".speakers must be at least 2");
  if (c.utts_per_speaker < 1) Fail(ErrorCode::kInvalidArgument, what, ".utts_per_speaker must be positive");
  if (!(c.duration > 0.0)) Fail(ErrorCode::kInvalidArgument, what, ".duration must be positive");
  if (c.sample_rate < 8000) Fail(ErrorCode::kInvalidArgument, what, ".sample_rate must be at least 8000");
}

}  // namespace

void RunConfig::Validate() const {
  ValidateCorpus(corpus, "corpus");
  ValidateCorpus(eval_corpus, "eval");
  segments.Validate();
  features.Validate();
  dino.Validate();
  ModelDims dims = model;
  dims.feat_dim = features.n_mels;
  dims.Validate();
  if (augment.bank_size < 1) Fail(ErrorCode::kInvalidArgument, "aug.bank_size must be positive");
  for (auto [p, name] : {std::pair{augment.p_pitch, "aug.p_pitch"},
                         {augment.p_tempo, "aug.p_tempo"},
                         {augment.p_noise_reverb, "aug.p_noise_reverb"}})
    if (!(p >= 0.0 && p <= 1.0)) Fail(ErrorCode::kInvalidArgument, name, " must be in [0, 1]");
  if (!(augment.snr_low_db <= augment.snr_high_db))
    Fail(ErrorCode::kInvalidArgument, "aug.snr_low must not exceed aug.snr_high");
  if (augment.p_pitch > 0.0 && augment.pitch_cents.empty())
    Fail(ErrorCode::kInvalidArgument, "aug.p_pitch > 0 needs aug.pitch_cents");
  if (augment.p_tempo > 0.0 && augment.tempo_ratios.empty())
    Fail(ErrorCode::kInvalidArgument, "aug.p_tempo > 0 needs aug.tempo_ratios");
  for (double c : augment.pitch_cents)
    if (!(std::abs(c) <= 1200.0)) Fail(ErrorCode::kInvalidArgument, "aug.pitch_cents outside [-1200, 1200]");
  for (double r : augment.tempo_ratios)
    if (!(r >= 0.5 && r <= 2.0)) Fail(ErrorCode::kInvalidArgument, "aug.tempo_ratios outside [0.5, 2]");
  if (!(lr_start > 0.0 && lr_end >= 0.0))
    Fail(ErrorCode::kInvalidArgument, "learning rates must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0))
    Fail(ErrorCode::kInvalidArgument, "optim.momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) Fail(ErrorCode::kInvalidArgument, "optim.weight_decay must be >= 0");
  if (epochs < (mode == RunMode::kAamFinetune ? 0 : 1))
    Fail(ErrorCode::kInvalidArgument, "train.epochs must be positive");
  if (batch_size < 1) Fail(ErrorCode::kInvalidArgument, "train.batch_size must be positive");
  if (checkpoint_every < 0) Fail(ErrorCode::kInvalidArgument, "train.checkpoint_every must be >= 0");
  if (!(label_fraction > 0.0 && label_fraction <= 1.0))
    Fail(ErrorCode::kInvalidArgument, "finetune.label_fraction must be in (0, 1]");
  if (!(aam.margin >= 0.0 && aam.scale > 0.0) || aam.n_classes < 0)
    Fail(ErrorCode::kInvalidArgument, "aam.margin and aam.n_classes must be >= 0 and aam.scale > 0");
  if (cohort_size < 0 || asnorm_top_n < 1)
    Fail(ErrorCode::kInvalidArgument, "eval.cohort_size must be >= 0 and eval.asnorm_top_n > 0");
  if (nmi_normalization != "arithmetic" && nmi_normalization != "geometric" &&
      nmi_normalization != "max")
    Fail(ErrorCode::kInvalidArgument, "eval.nmi_normalization must be arithmetic, geometric or max");
}

const std::vector<ConfigKey>& ConfigKeys() {
  static const std::vector<ConfigKey> keys = BuildKeys();
  return keys;
}

void SetConfigValue(RunConfig* cfg, std::string_view key, std::string_view value) {
  FindKey(Trim(key)).set(*cfg, value);
}

std::string GetConfigValue(const RunConfig& cfg, std::string_view key) {
  return FindKey(Trim(key)).get(cfg);
}

void ApplyConfigText(RunConfig* cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = Trim(line);
    if (s.empty() || s.front() == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string_view::npos)
      Fail(ErrorCode::kInvalidArgument, "config line ", lineno, ": expected key=value");
    SetConfigValue(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
}

RunConfig ParseConfig(const std::string& text) {
  RunConfig cfg;
  ApplyConfigText(&cfg, text);
  return cfg;
}

RunConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open config ", path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string SerializeConfig(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : ConfigKeys()) out += k.name + "=" + k.get(cfg) + "\n";
  return out;
}

void SaveConfig(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write ", path);
  out << SerializeConfig(cfg);
  if (!out) Fail(ErrorCode::kIo, "write failed for ", path);
}

}  // namespace spkdino
