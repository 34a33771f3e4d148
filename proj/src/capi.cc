// capi.cc

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

#include "spkdino/spkdino.h"

#include <cstring>
#include <filesystem>
#include <map>
#include <new>
#include <string>

#include "augment.h"
#include "checkpoint.h"
#include "config.h"
#include "corpus.h"
#include "eval.h"
#include "experiments.h"
#include "fbank.h"
#include "net.h"
#include "text.h"
#include "trainer.h"

struct spkdino_config {
  spkdino::RunConfig cfg;
};

struct spkdino_model {
  spkdino::ModelParams params;
  spkdino::FeatureConfig features;
};

struct spkdino_report {
  std::string text;
  std::map<std::string, double> values;
};

namespace {

using spkdino::ErrorCode;
using spkdino::Fail;

thread_local std::string g_last_error;

template <typename F>
int Guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SPKDINO_OK;
  } catch (const spkdino::Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SPKDINO_ERR_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return SPKDINO_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SPKDINO_ERR_INTERNAL;
  }
}

void Require(const void* p, const char* what) {
  if (p == nullptr) Fail(ErrorCode::kInvalidArgument, what, " must not be NULL");
}

std::string OrEmpty(const char* s) { return s == nullptr ? std::string() : std::string(s); }

// Parses the key<TAB>value lines of a text report; non-numeric values map
// yes/no to 1/0 and are otherwise skipped.
spkdino_report* MakeReport(std::string text) {
  auto* r = new spkdino_report;
  r->text = std::move(text);
  for (const auto& line : spkdino::Split(r->text, '\n')) {
    auto kv = spkdino::Split(line, '\t');
    if (kv.size() != 2) continue;
    if (kv[1] == "yes") r->values[kv[0]] = 1.0;
    else if (kv[1] == "no") r->values[kv[0]] = 0.0;
    else {
      try {
        r->values[kv[0]] = spkdino::ParseDouble(kv[1], kv[0]);
      } catch (const spkdino::Error&) {
      }
    }
  }
  return r;
}

// Renders into dir/wav/<split>/; the two synthetic corpora share utterance ids.
spkdino::Manifest RenderManifest(const spkdino::Manifest& m, const std::filesystem::path& dir,
                                 const std::string& split) {
  std::filesystem::create_directories(dir / "wav" / split);
  spkdino::Manifest out;
  out.set_base_dir(dir.string());
  for (const auto& e : m.entries()) {
    std::string rel = "wav/" + split + "/" + e.utterance_id + ".wav";
    spkdino::WriteWav(spkdino::Resolve(m, e), (dir / rel).string());
    spkdino::ManifestEntry w;
    w.utterance_id = e.utterance_id;
    w.speaker_id = e.speaker_id;
    w.wav_path = rel;
    out.Add(std::move(w));
  }
  return out;
}

}  // namespace

extern "C" {

const char* spkdino_version(void) { return "1.0.0"; }

const char* spkdino_status_string(int status) {
  switch (status) {
    case SPKDINO_OK: return "ok";
    case SPKDINO_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SPKDINO_ERR_IO: return "i/o error";
    case SPKDINO_ERR_FORMAT: return "format error";
    case SPKDINO_ERR_NUMERIC: return "numerical failure";
    case SPKDINO_ERR_NOT_FOUND: return "not found";
    case SPKDINO_ERR_INTERNAL: return "internal error";
    default: return "unknown status";
  }
}

const char* spkdino_last_error(void) { return g_last_error.c_str(); }

int spkdino_config_create(spkdino_config** out) {
  return Guard([&] {
    Require(out, "out");
    *out = new spkdino_config;
  });
}

int spkdino_config_load(const char* path, spkdino_config** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto* c = new spkdino_config;
    try {
      c->cfg = spkdino::LoadConfig(path);
    } catch (...) {
      delete c;
      throw;
    }
    *out = c;
  });
}

void spkdino_config_destroy(spkdino_config* cfg) { delete cfg; }

int spkdino_config_set(spkdino_config* cfg, const char* key, const char* value) {
  return Guard([&] {
    Require(cfg, "cfg");
    Require(key, "key");
    Require(value, "value");
    spkdino::SetConfigValue(&cfg->cfg, key, value);
  });
}

int spkdino_config_get(const spkdino_config* cfg, const char* key, char* buf, size_t buf_len,
                       size_t* needed) {
  return Guard([&] {
    Require(cfg, "cfg");
    Require(key, "key");
    std::string v = spkdino::GetConfigValue(cfg->cfg, key);
    if (needed) *needed = v.size() + 1;
    if (buf && buf_len > 0) {
      size_t n = std::min(v.size(), buf_len - 1);
      std::memcpy(buf, v.data(), n);
      buf[n] = '\0';
    }
  });
}

int spkdino_config_save(const spkdino_config* cfg, const char* path) {
  return Guard([&] {
    Require(cfg, "cfg");
    Require(path, "path");
    spkdino::SaveConfig(cfg->cfg, path);
  });
}

int spkdino_config_validate(const spkdino_config* cfg) {
  return Guard([&] {
    Require(cfg, "cfg");
    cfg->cfg.Validate();
  });
}

size_t spkdino_config_key_count(void) { return spkdino::ConfigKeys().size(); }

const char* spkdino_config_key_name(size_t index) {
  const auto& keys = spkdino::ConfigKeys();
  return index < keys.size() ? keys[index].name.c_str() : nullptr;
}

const char* spkdino_config_key_doc(size_t index) {
  const auto& keys = spkdino::ConfigKeys();
  return index < keys.size() ? keys[index].doc.c_str() : nullptr;
}

int spkdino_synth(const spkdino_config* cfg, const char* out_dir, int render_wav) {
  return Guard([&] {
    Require(cfg, "cfg");
    Require(out_dir, "out_dir");
    const spkdino::RunConfig& c = cfg->cfg;
    c.Validate();
    spkdino::AugmentConfig tempo;
    tempo.p_tempo = c.augment.p_tempo;
    tempo.tempo_ratio_choices = c.augment.tempo_ratios;
    const double min_duration = spkdino::MinimumDuration(tempo, c.segments);
    spkdino::Manifest train = spkdino::LoadCorpus(c.corpus, min_duration);
    spkdino::Manifest eval = spkdino::LoadCorpus(c.eval_corpus, 0.0);
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    if (render_wav) {
      train = RenderManifest(train, dir, "train");
      eval = RenderManifest(eval, dir, "eval");
    }
    spkdino::WriteManifest(train, (dir / "train.manifest").string());
    spkdino::WriteManifest(eval, (dir / "eval.manifest").string());
    spkdino::WriteTrials(spkdino::GenerateTrials(eval, c.trials_seed),
                         (dir / "eval.trials").string());
  });
}

int spkdino_train(const spkdino_config* cfg, const char* out_dir, const char* resume_checkpoint,
                  int verbose) {
  return Guard([&] {
    Require(cfg, "cfg");
    Require(out_dir, "out_dir");
    spkdino::TrainOptions opts;
    opts.out_dir = out_dir;
    opts.resume_checkpoint = OrEmpty(resume_checkpoint);
    opts.verbose = verbose != 0;
    spkdino::TrainDino(cfg->cfg, opts);
  });
}

int spkdino_finetune(const spkdino_config* cfg, const char* out_dir, int verbose) {
  return Guard([&] {
    Require(cfg, "cfg");
    Require(out_dir, "out_dir");
    spkdino::TrainOptions opts;
    opts.out_dir = out_dir;
    opts.verbose = verbose != 0;
    spkdino::FinetuneAam(cfg->cfg, opts);
  });
}

int spkdino_evaluate(const spkdino_config* cfg, const char* checkpoint, const char* trials,
                     const char* out_dir, spkdino_report** out) {
  return Guard([&] {
    Require(cfg, "cfg");
    Require(checkpoint, "checkpoint");
    spkdino::EvalReport r =
        spkdino::Evaluate(cfg->cfg, checkpoint, OrEmpty(trials), OrEmpty(out_dir));
    if (out) *out = MakeReport(spkdino::FormatReport(r));
  });
}

int spkdino_analyze(const char* log_path, const char* out_dir, spkdino_report** out) {
  return Guard([&] {
    Require(log_path, "log_path");
    spkdino::LogSummary s = spkdino::Analyze(log_path, OrEmpty(out_dir));
    if (out) *out = MakeReport(spkdino::FormatSummary(s));
  });
}

int spkdino_ablate(const spkdino_config* cfg, const char* sweep_path, const char* out_dir,
                   int verbose, spkdino_report** out) {
  return Guard([&] {
    Require(cfg, "cfg");
    Require(sweep_path, "sweep_path");
    Require(out_dir, "out_dir");
    auto rows = spkdino::Ablate(cfg->cfg, spkdino::ReadSweep(sweep_path), out_dir, verbose != 0);
    if (out) *out = MakeReport(spkdino::FormatComparison(rows));
  });
}

const char* spkdino_report_text(const spkdino_report* report) {
  return report ? report->text.c_str() : "";
}

int spkdino_report_get(const spkdino_report* report, const char* key, double* value) {
  return Guard([&] {
    Require(report, "report");
    Require(key, "key");
    Require(value, "value");
    auto it = report->values.find(key);
    if (it == report->values.end()) Fail(ErrorCode::kNotFound, "report has no field ", key);
    *value = it->second;
  });
}

void spkdino_report_destroy(spkdino_report* report) { delete report; }

int spkdino_model_load(const char* checkpoint, spkdino_model** out) {
  return Guard([&] {
    Require(checkpoint, "checkpoint");
    Require(out, "out");
    spkdino::Checkpoint ckpt = spkdino::LoadCheckpoint(checkpoint);
    auto* m = new spkdino_model;
    m->params = std::move(ckpt.student);
    try {
      if (!ckpt.config_text.empty()) m->features = spkdino::ParseConfig(ckpt.config_text).features;
    } catch (...) {
      delete m;
      throw;
    }
    *out = m;
  });
}

void spkdino_model_destroy(spkdino_model* model) { delete model; }

size_t spkdino_model_embedding_dim(const spkdino_model* model) {
  return model ? static_cast<size_t>(model->params.embed.weight.rows()) : 0;
}

int spkdino_model_embed(const spkdino_model* model, const double* samples, size_t n_samples,
                        int sample_rate, double* out, size_t out_len) {
  return Guard([&] {
    Require(model, "model");
    Require(samples, "samples");
    Require(out, "out");
    if (sample_rate <= 0) Fail(ErrorCode::kInvalidArgument, "sample rate must be positive");
    const size_t dim = static_cast<size_t>(model->params.embed.weight.rows());
    if (out_len < dim)
      Fail(ErrorCode::kInvalidArgument, "output buffer holds ", out_len, " values, need ", dim);
    spkdino::Waveform w;
    w.sample_rate = sample_rate;
    w.samples.assign(samples, samples + n_samples);
    spkdino::Vector e =
        spkdino::Encode(model->params, spkdino::LogMel(w, model->features).frames);
    for (size_t i = 0; i < dim; ++i) out[i] = e(static_cast<Eigen::Index>(i));
  });
}

}  // extern "C"
