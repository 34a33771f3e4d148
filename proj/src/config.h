// config.h

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

#ifndef SPKDINO_CONFIG_H_
#define SPKDINO_CONFIG_H_

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "augment.h"
#include "dino.h"
#include "fbank.h"
#include "net.h"

namespace spkdino {

enum class RunMode { kDinoPretrain, kAamFinetune };

/// Either a manifest file or the arguments of a synthetic corpus.
struct CorpusSpec {
  std::string manifest;
  int speakers = 20;
  int utts_per_speaker = 50;
  double duration = 6.0;
  uint64_t seed = 1;
  int sample_rate = 16000;
};

struct AugmentSpec {
  double p_pitch = 0.0;
  std::vector<double> pitch_cents{-200.0, 200.0};
  double p_tempo = 0.0;
  std::vector<double> tempo_ratios{0.9, 1.1};
  double p_noise_reverb = 1.0;
  double snr_low_db = 5.0;
  double snr_high_db = 20.0;
  std::string noise_manifest;  // empty: generated bank
  std::string ir_manifest;     // empty: generated bank
  int bank_size = 8;
  uint64_t bank_seed = 77;
};

struct RunConfig {
  RunMode mode = RunMode::kDinoPretrain;
  uint64_t seed = 7;

  CorpusSpec corpus;
  AugmentSpec augment;
  SegmentPlan segments;
  FeatureConfig features;
  ModelDims model;
  bool data_init = true;  // standardise layer outputs on a probe batch at init
  DinoConfig dino;

  double lr_start = 0.002;
  double lr_end = 5e-6;
  double momentum = 0.9;
  double weight_decay = 0.0;
  int epochs = 30;
  int batch_size = 16;
  int checkpoint_every = 0;  // epochs; 0 writes only the final checkpoint

  // Supervised fine-tuning.
  std::string finetune_init;    // pretrained checkpoint, empty for random init
  double label_fraction = 0.2;  // share of each speaker's utterances that is labelled
  AamConfig aam;

  // Evaluation.
  CorpusSpec eval_corpus{"", 20, 10, 6.0, 1001, 16000};
  std::string trials;
  uint64_t trials_seed = 5;
  int cohort_size = 200;
  int asnorm_top_n = 50;
  std::string nmi_normalization = "arithmetic";

  void Validate() const;
};

struct ConfigKey {
  std::string name;
  std::string doc;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

/// Every recognised key, in serialisation order.
const std::vector<ConfigKey>& ConfigKeys();

/// Sets one key; throws Error(kInvalidArgument) for unknown keys or bad values.
void SetConfigValue(RunConfig* cfg, std::string_view key, std::string_view value);
std::string GetConfigValue(const RunConfig& cfg, std::string_view key);

/// Applies `key=value` lines (blank lines and # comments ignored) on top of cfg.
void ApplyConfigText(RunConfig* cfg, const std::string& text);
RunConfig ParseConfig(const std::string& text);
RunConfig LoadConfig(const std::string& path);

/// Fully resolved config, one key=value per line; parsing it back yields an
/// identical RunConfig.
std::string SerializeConfig(const RunConfig& cfg);
void SaveConfig(const RunConfig& cfg, const std::string& path);

}  // namespace spkdino

#endif  // SPKDINO_CONFIG_H_
