// experiments.h

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

// Post-hoc training log analysis and sequential ablation sweeps.

#ifndef SPKDINO_EXPERIMENTS_H_
#define SPKDINO_EXPERIMENTS_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "config.h"
#include "trainer.h"

namespace spkdino {

struct TrainLog {
  int k = 0;
  int64_t warm_steps = 0;
  int64_t total_steps = 0;
  std::vector<TrainLogRow> rows;
};

TrainLog ParseTrainLog(const std::string& text);
TrainLog ReadTrainLog(const std::string& path);

inline constexpr double kCollapseMaxdimFreq = 0.9;
inline constexpr double kCollapseEntropyFraction = 0.99;
inline constexpr double kHealthyEntropyLow = 0.05;
inline constexpr double kHealthyEntropyHigh = 0.95;

struct LogSummary {
  int k = 0;
  size_t rows = 0;
  int64_t warm_steps = 0;
  int64_t total_steps = 0;
  double first_loss = 0.0;
  double final_loss = 0.0;
  double first_lambda = 0.0, last_lambda = 0.0;
  double first_lr = 0.0, last_lr = 0.0;
  double first_tau_t = 0.0, last_tau_t = 0.0;
  // Rows at or after the end of the teacher temperature warm-up.
  double min_entropy = 0.0, max_entropy = 0.0;
  double tail_entropy = 0.0;  // mean over the last tenth of those rows
  double tail_maxdim_freq = 0.0;
  bool entropy_in_band = false;  // every row within (0.05, 0.95) ln K
  bool collapsed = false;
  std::string collapse_kind;     // "dominant-dimension", "uniform" or empty
};

/// Collapse is flagged when the tail max-dim frequency exceeds 0.9 or the
/// tail entropy exceeds 0.99 ln K.
LogSummary SummarizeLog(const TrainLog& log);
std::string FormatSummary(const LogSummary& s);

/// Plot-ready series: step, loss, entropy, entropy / ln K, lambda, lr, tau_t,
/// maxdim_freq.
std::string FormatSeries(const TrainLog& log);

/// Reads a training log, writes summary.txt and series.tsv into out_dir
/// (when non-empty) and returns the summary.
LogSummary Analyze(const std::string& log_path, const std::string& out_dir);

struct SweepRun {
  std::string name;
  std::vector<std::pair<std::string, std::string>> overrides;
};

/// Blocks of `[name]` followed by key=value override lines.
std::vector<SweepRun> ParseSweep(const std::string& text);
std::vector<SweepRun> ReadSweep(const std::string& path);

struct AblationRow {
  std::string name;
  double eer = 0.0;
  double min_dcf = 0.0;
  double asnorm_eer = -1.0;  // -1 when no cohort was used
  double nmi = -1.0;         // -1 without a teacher head
  double final_loss = 0.0;
  double tail_entropy = -1.0;
  bool collapsed = false;
};

/// Runs every sweep entry in order into out_dir/<name>/ (train or finetune per
/// its mode, then evaluate) and writes out_dir/comparison.tsv.
std::vector<AblationRow> Ablate(const RunConfig& base, const std::vector<SweepRun>& sweep,
                                const std::string& out_dir, bool verbose = false);

std::string FormatComparison(const std::vector<AblationRow>& rows);

}  // namespace spkdino

#endif  // SPKDINO_EXPERIMENTS_H_
