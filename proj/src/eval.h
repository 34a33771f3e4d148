// eval.h

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

#ifndef SPKDINO_EVAL_H_
#define SPKDINO_EVAL_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "common.h"
#include "config.h"
#include "corpus.h"
#include "fbank.h"
#include "net.h"

namespace spkdino {

struct Trial {
  std::string enroll;
  std::string test;
  bool target = false;
};

/// Lines `1|0 enroll_id test_id`.
std::vector<Trial> ReadTrials(const std::string& path);
void WriteTrials(const std::vector<Trial>& trials, const std::string& path);

/// Every same-speaker pair as a target and as many seeded random
/// cross-speaker pairs as non-targets.
std::vector<Trial> GenerateTrials(const Manifest& manifest, uint64_t seed);

/// Immutable utterance id -> embedding table.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> ids, Matrix vectors);

  const std::vector<std::string>& ids() const { return ids_; }
  const Matrix& vectors() const { return vectors_; }  // one row per utterance
  bool Contains(const std::string& id) const { return index_.count(id) > 0; }
  Vector Get(const std::string& id) const;

 private:
  std::vector<std::string> ids_;
  Matrix vectors_;
  std::unordered_map<std::string, size_t> index_;
};

/// Whole-utterance student embeddings; no cropping, no augmentation.
EmbeddingTable ExtractEmbeddings(const ModelParams& model, const Manifest& manifest,
                                 const FeatureConfig& features);

/// dot(a, b) / (|a| |b|) with norms floored at 1e-12.
double CosineScore(const Vector& a, const Vector& b);

/// Cosine score of every trial; throws Error(kNotFound) listing missing ids.
std::vector<double> ScoreTrials(const EmbeddingTable& table, const std::vector<Trial>& trials);

inline constexpr double kAsNormSigmaFloor = 1e-6;

struct AsNormStats {
  double mean = 0.0;
  double stddev = 0.0;  // population, floored
  bool floored = false;
};

/// Mean and standard deviation of the top_n highest cohort cosine scores of e.
AsNormStats CohortStats(const Vector& e, const Matrix& cohort, int top_n);

/// 0.5 * ((s - mu_e) / sigma_e + (s - mu_t) / sigma_t).
double AsNormScore(double s, const AsNormStats& enroll, const AsNormStats& test);

struct AsNormResult {
  std::vector<double> scores;
  bool sigma_floored = false;  // some cohort was degenerate
};

AsNormResult AsNorm(const EmbeddingTable& table, const std::vector<Trial>& trials,
                    const std::vector<double>& raw, const Matrix& cohort, int top_n);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

/// Equal error rate on the convex hull of the ROC: operating points are
/// taken at midpoints between distinct scores and the EER is where the hull
/// crosses P_miss = P_fa, interpolating linearly along the hull segment.
EerResult ComputeEer(const std::vector<double>& scores, const std::vector<bool>& targets);

/// Normalised minimum detection cost.
double ComputeMinDcf(const std::vector<double>& scores, const std::vector<bool>& targets,
                     double p_target = 0.05, double c_miss = 1.0, double c_fa = 1.0);

enum class NmiNormalization { kArithmetic, kGeometric, kMax };
NmiNormalization ParseNmiNormalization(const std::string& name);

/// Normalised mutual information of two labelings. Two constant labelings
/// give 1; otherwise a zero entropy on either side gives 0.
double Nmi(const std::vector<int>& a, const std::vector<int>& b,
           NmiNormalization norm = NmiNormalization::kArithmetic);

/// Indices of the two largest entries, ties to the lower index, returned as
/// (smaller index, larger index).
std::pair<int, int> TopTwo(const Vector& p);

struct PseudoLabels {
  std::vector<std::string> ids;
  std::vector<int> top1;
  std::vector<std::pair<int, int>> top2;
  int distinct_top1 = 0;
  int distinct_top2 = 0;
  std::vector<Vector> probs;  // sharpened teacher distributions
};

/// Teacher distributions softmax((q - center) / tau_t) on whole utterances.
PseudoLabels ComputePseudoLabels(const ModelParams& teacher, const Vector& center, double tau_t,
                                 const Manifest& manifest, const FeatureConfig& features);
PseudoLabels PseudoLabelsFromProbs(std::vector<std::string> ids, std::vector<Vector> probs);

struct CollapseMetrics {
  double entropy = 0.0;      // mean H(p)
  double maxdim_freq = 0.0;  // share of distributions whose argmax is the most common one
  double kl_uniform = 0.0;   // mean KL(p || uniform)
};

CollapseMetrics CollapseReport(const std::vector<Vector>& probs);

/// Integer class per utterance from the manifest's speaker ids.
std::vector<int> SpeakerLabels(const Manifest& manifest, const std::vector<std::string>& ids);

struct EvalReport {
  size_t n_trials = 0;
  size_t n_targets = 0;
  EerResult eer;
  double min_dcf = 0.0;
  bool has_asnorm = false;
  EerResult eer_asnorm;
  double min_dcf_asnorm = 0.0;
  bool asnorm_sigma_floored = false;
  bool has_pseudo = false;
  double nmi = 0.0;
  std::string nmi_normalization = "arithmetic";
  int distinct_top1 = 0;
  int distinct_top2 = 0;
  int n_speakers = 0;
  CollapseMetrics collapse;
};

std::string FormatReport(const EvalReport& report);

/// Embeds the evaluation corpus with the checkpoint's student, scores the
/// trials (read from trials_path, or generated), and adds AS-norm and
/// teacher pseudo-label analysis when available. Writes scores.txt and
/// report.txt into out_dir when it is non-empty.
EvalReport Evaluate(const RunConfig& cfg, const std::string& checkpoint_path,
                    const std::string& trials_path, const std::string& out_dir);

}  // namespace spkdino

#endif  // SPKDINO_EVAL_H_
