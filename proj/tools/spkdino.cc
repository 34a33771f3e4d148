// spkdino.cc

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

// Command-line front end over the C interface.
//
//   spkdino synth    --out DIR [--wav]
//   spkdino train    --out DIR [--checkpoint RESUME]
//   spkdino finetune --out DIR [--checkpoint PRETRAINED]
//   spkdino eval     --checkpoint PATH [--trials PATH] [--manifest PATH] [--out DIR]
//   spkdino analyze  --log PATH [--out DIR]
//   spkdino ablate   --sweep PATH --out DIR
//
// Every command accepts --config PATH, --override KEY=VALUE (repeatable),
// --seed and --epochs; flags win over the config file. Exit status is 0 on
// success, 2 for usage errors and 1 when the run itself fails.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spkdino/spkdino.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<unsigned long long> seed;
  std::optional<int> epochs;
  bool quiet = false;
};

void AddCommon(CLI::App* cmd, CommonFlags* f) {
  cmd->add_option("--config", f->config, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--override", f->overrides, "KEY=VALUE applied after the config file")
      ->type_name("KEY=VALUE");
  cmd->add_option("--seed", f->seed, "master seed");
  cmd->add_option("--epochs", f->epochs, "training epochs")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--quiet", f->quiet, "no progress output");
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void Check(int status, const char* what) {
  if (status != SPKDINO_OK)
    throw RunError(std::string(what) + ": " + spkdino_status_string(status) + ": " +
                   spkdino_last_error());
}

void Set(spkdino_config* cfg, const std::string& key, const std::string& value) {
  if (spkdino_config_set(cfg, key.c_str(), value.c_str()) != SPKDINO_OK)
    throw UsageError(spkdino_last_error());
}

// Owns a config built from --config, --override and the dedicated flags.
struct Config {
  spkdino_config* ptr = nullptr;
  ~Config() { spkdino_config_destroy(ptr); }
};

void BuildConfig(const CommonFlags& f, Config* out) {
  int st = f.config.empty() ? spkdino_config_create(&out->ptr)
                            : spkdino_config_load(f.config.c_str(), &out->ptr);
  if (st == SPKDINO_ERR_INVALID_ARGUMENT) throw UsageError(spkdino_last_error());
  Check(st, "loading config");
  for (const auto& kv : f.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--override expects KEY=VALUE, got '" + kv + "'");
    Set(out->ptr, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) Set(out->ptr, "seed", std::to_string(*f.seed));
  if (f.epochs) Set(out->ptr, "train.epochs", std::to_string(*f.epochs));
  if (spkdino_config_validate(out->ptr) != SPKDINO_OK) throw UsageError(spkdino_last_error());
}

void PrintReport(spkdino_report* r) {
  std::fputs(spkdino_report_text(r), stdout);
  spkdino_report_destroy(r);
}

std::string KeyHelp() {
  std::string s = "\nConfig keys:\n";
  for (size_t i = 0; i < spkdino_config_key_count(); ++i)
    s += std::string("  ") + spkdino_config_key_name(i) + "  " + spkdino_config_key_doc(i) + "\n";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-distilled speaker embeddings: synthesis, training, evaluation"};
  app.require_subcommand(1);
  app.footer(KeyHelp());

  CommonFlags common;
  std::string out, checkpoint, trials, manifest, log, sweep;
  bool wav = false;

  auto* synth = app.add_subcommand("synth", "write training/evaluation manifests and trials");
  AddCommon(synth, &common);
  synth->add_option("--out", out, "output directory")->required();
  synth->add_flag("--wav", wav, "render audio files instead of synthetic references");

  auto* train = app.add_subcommand("train", "self-distillation pre-training");
  AddCommon(train, &common);
  train->add_option("--out", out, "run directory")->required();
  train->add_option("--checkpoint", checkpoint, "checkpoint to resume from")
      ->check(CLI::ExistingFile);

  auto* finetune = app.add_subcommand("finetune", "angular-margin fine-tuning on labelled data");
  AddCommon(finetune, &common);
  finetune->add_option("--out", out, "run directory")->required();
  finetune->add_option("--checkpoint", checkpoint, "pretrained checkpoint (default: random init)")
      ->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "score trials and report EER / minDCF / NMI");
  AddCommon(eval, &common);
  eval->add_option("--checkpoint", checkpoint, "model checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--trials", trials, "trial list (default: generated)")->check(CLI::ExistingFile);
  eval->add_option("--manifest", manifest, "evaluation manifest")->check(CLI::ExistingFile);
  eval->add_option("--out", out, "directory for scores.txt and report.txt");

  auto* analyze = app.add_subcommand("analyze", "summarise a training log");
  AddCommon(analyze, &common);
  analyze->add_option("--log", log, "train_log.tsv")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", out, "directory for summary.txt and series.tsv");

  auto* ablate = app.add_subcommand("ablate", "run a sweep of config overrides");
  AddCommon(ablate, &common);
  ablate->add_option("--sweep", sweep, "sweep file of [name] blocks")->required()->check(CLI::ExistingFile);
  ablate->add_option("--out", out, "directory for the runs and comparison.tsv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    Config cfg;
    if (*finetune && !checkpoint.empty()) common.overrides.push_back("finetune.init=" + checkpoint);
    if (*eval && !manifest.empty()) common.overrides.push_back("eval.manifest=" + manifest);
    if (*finetune) common.overrides.insert(common.overrides.begin(), "mode=aam_finetune");
    BuildConfig(common, &cfg);
    const int verbose = common.quiet ? 0 : 1;

    if (*synth) {
      Check(spkdino_synth(cfg.ptr, out.c_str(), wav ? 1 : 0), "synth");
    } else if (*train) {
      Check(spkdino_train(cfg.ptr, out.c_str(), checkpoint.empty() ? nullptr : checkpoint.c_str(),
                          verbose),
            "train");
    } else if (*finetune) {
      Check(spkdino_finetune(cfg.ptr, out.c_str(), verbose), "finetune");
    } else if (*eval) {
      spkdino_report* r = nullptr;
      Check(spkdino_evaluate(cfg.ptr, checkpoint.c_str(), trials.empty() ? nullptr : trials.c_str(),
                             out.empty() ? nullptr : out.c_str(), &r),
            "eval");
      PrintReport(r);
    } else if (*analyze) {
      spkdino_report* r = nullptr;
      Check(spkdino_analyze(log.c_str(), out.empty() ? nullptr : out.c_str(), &r), "analyze");
      PrintReport(r);
    } else if (*ablate) {
      spkdino_report* r = nullptr;
      Check(spkdino_ablate(cfg.ptr, sweep.c_str(), out.c_str(), verbose, &r), "ablate");
      PrintReport(r);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const RunError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
