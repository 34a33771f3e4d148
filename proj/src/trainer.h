// trainer.h

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

#ifndef SPKDINO_TRAINER_H_
#define SPKDINO_TRAINER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "augment.h"
#include "checkpoint.h"
#include "config.h"
#include "corpus.h"
#include "dino.h"
#include "net.h"

namespace spkdino {

/// One row of the training log.
struct TrainLogRow {
  int64_t step = 0;
  double loss = 0.0;
  double teacher_entropy = 0.0;  // mean H(p_t) over the batch's teacher views
  double lambda = 0.0;
  double lr = 0.0;
  double tau_t = 0.0;
  double maxdim_freq = 0.0;      // share of teacher views whose argmax is the batch mode
};

struct TrainOptions {
  std::string out_dir;            // log, config and checkpoints; empty keeps everything in memory
  std::string resume_checkpoint;  // continue from this checkpoint
  int64_t stop_after_step = -1;   // >= 0: checkpoint and return once this many steps are done
  bool verbose = false;           // progress to stderr
};

struct TrainResult {
  ModelParams student;
  ModelParams teacher;
  Vector center;
  int64_t steps_done = 0;
  int64_t total_steps = 0;
  std::vector<TrainLogRow> log;
  std::string checkpoint_path;
};

/// Training or evaluation corpus described by `spec`: the manifest when one is
/// named, otherwise a synthetic corpus.
Manifest LoadCorpus(const CorpusSpec& spec, double min_duration);

/// Decoded audio of a whole manifest, held as 32-bit samples.
class AudioCache {
 public:
  explicit AudioCache(const Manifest& manifest);
  Waveform Get(size_t index) const;
  size_t size() const { return audio_.size(); }

 private:
  std::vector<std::vector<float>> audio_;
  std::vector<int> rates_;
};

/// Augmentation settings with noise and impulse-response banks loaded or
/// generated.
AugmentConfig BuildAugmentConfig(const RunConfig& cfg, int sample_rate);

/// DINO pre-training. Deterministic given the config.
TrainResult TrainDino(const RunConfig& cfg, const TrainOptions& opts);

struct FinetuneResult {
  ModelParams model;  // encoder + aam classifier
  std::vector<std::string> labelled;  // utterance ids used
  std::vector<double> losses;         // per step
  std::string checkpoint_path;
};

/// Utterances that keep their labels: the first ceil(fraction * n) of each
/// speaker's utterances after a seeded shuffle.
std::vector<size_t> LabelledSubset(const Manifest& manifest, double fraction, uint64_t seed);

/// Supervised fine-tuning with the additive angular margin loss on a labelled
/// subset, starting from cfg.finetune_init or from random weights.
FinetuneResult FinetuneAam(const RunConfig& cfg, const TrainOptions& opts);

std::string FormatLogHeader(int k, int64_t warm_steps, int64_t total_steps);
std::string FormatLogRow(const TrainLogRow& row);

}  // namespace spkdino

#endif  // SPKDINO_TRAINER_H_
