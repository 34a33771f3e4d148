// eval.cc

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

#include "eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "checkpoint.h"
#include "dino.h"
#include "text.h"
#include "trainer.h"

namespace spkdino {

namespace {

struct OperatingPoint {
  double p_fa;
  double p_miss;
  double threshold;  // accept scores >= threshold
};

void CheckScores(const std::vector<double>& scores, const std::vector<bool>& targets,
                 size_t* n_target, size_t* n_nontarget) {
  if (scores.size() != targets.size())
    Fail(ErrorCode::kInvalidArgument, scores.size(), " scores but ", targets.size(), " labels");
  *n_target = static_cast<size_t>(std::count(targets.begin(), targets.end(), true));
  *n_nontarget = targets.size() - *n_target;
  if (*n_target == 0 || *n_nontarget == 0)
    Fail(ErrorCode::kInvalidArgument, "need at least one target and one non-target trial");
  for (double s : scores)
    if (!std::isfinite(s)) Fail(ErrorCode::kNumeric, "non-finite trial score");
}

// Operating points from accept-all to reject-all, one per distinct score.
std::vector<OperatingPoint> SweepOperatingPoints(const std::vector<double>& scores,
                                                 const std::vector<bool>& targets) {
  size_t n_t = 0, n_n = 0;
  CheckScores(scores, targets, &n_t, &n_n);
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  std::vector<OperatingPoint> pts;
  size_t misses = 0, false_alarms = n_n;
  pts.push_back({1.0, 0.0, scores[order[0]]});
  for (size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    size_t j = i;
    for (; j < order.size() && scores[order[j]] == s; ++j) {
      if (targets[order[j]]) ++misses;
      else --false_alarms;
    }
    double thr = j < order.size() ? 0.5 * (s + scores[order[j]])
                                  : std::nextafter(s, std::numeric_limits<double>::infinity());
    pts.push_back({static_cast<double>(false_alarms) / static_cast<double>(n_n),
                   static_cast<double>(misses) / static_cast<double>(n_t), thr});
    i = j;
  }
  return pts;
}

double Cross(const OperatingPoint& o, const OperatingPoint& a, const OperatingPoint& b) {
  return (a.p_fa - o.p_fa) * (b.p_miss - o.p_miss) - (a.p_miss - o.p_miss) * (b.p_fa - o.p_fa);
}

double EntropyOfCounts(const std::vector<double>& counts, double total) {
  double h = 0.0;
  for (double c : counts)
    if (c > 0.0) h -= (c / total) * std::log(c / total);
  return h;
}

std::vector<int> Compact(const std::vector<int>& labels, int* n_classes) {
  std::map<int, int> ids;
  std::vector<int> out(labels.size());
  for (size_t i = 0; i < labels.size(); ++i)
    out[i] = ids.emplace(labels[i], static_cast<int>(ids.size())).first->second;
  *n_classes = static_cast<int>(ids.size());
  return out;
}

bool SamePartition(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<int, int> ab, ba;
  for (size_t i = 0; i < a.size(); ++i) {
    if (ab.emplace(a[i], b[i]).first->second != b[i]) return false;
    if (ba.emplace(b[i], a[i]).first->second != a[i]) return false;
  }
  return true;
}

std::string JoinIds(const std::vector<std::string>& ids) {
  std::string s;
  for (size_t i = 0; i < ids.size() && i < 20; ++i) s += (i ? ", " : "") + ids[i];
  if (ids.size() > 20) s += ", ... (" + std::to_string(ids.size()) + " total)";
  return s;
}

}  // namespace

std::vector<Trial> ReadTrials(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open trial list ", path);
  std::vector<Trial> trials;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto f = SplitFields(line);
    if (f.empty()) continue;
    if (f.size() != 3 || (f[0] != "0" && f[0] != "1"))
      Fail(ErrorCode::kFormat, path, ":", lineno, ": expected '1|0 enroll_id test_id'");
    trials.push_back({f[1], f[2], f[0] == "1"});
  }
  return trials;
}

void WriteTrials(const std::vector<Trial>& trials, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write ", path);
  for (const auto& t : trials) out << (t.target ? '1' : '0') << ' ' << t.enroll << ' ' << t.test << '\n';
  if (!out) Fail(ErrorCode::kIo, "write failed for ", path);
}

std::vector<Trial> GenerateTrials(const Manifest& manifest, uint64_t seed) {
  std::map<std::string, std::vector<size_t>> by_speaker;
  for (size_t i = 0; i < manifest.size(); ++i)
    by_speaker[manifest.entries()[i].speaker_id].push_back(i);
  if (by_speaker.size() < 2) Fail(ErrorCode::kInvalidArgument, "trials need at least 2 speakers");
  const auto& e = manifest.entries();
  std::vector<Trial> trials;
  for (const auto& spk : manifest.SpeakerIds()) {
    const auto& utts = by_speaker[spk];
    for (size_t a = 0; a < utts.size(); ++a)
      for (size_t b = a + 1; b < utts.size(); ++b)
        trials.push_back({e[utts[a]].utterance_id, e[utts[b]].utterance_id, true});
  }
  const size_t n_target = trials.size();
  if (n_target == 0) Fail(ErrorCode::kInvalidArgument, "no speaker has two utterances");

  size_t cross_pairs = 0;
  for (const auto& [spk, utts] : by_speaker) cross_pairs += utts.size() * (manifest.size() - utts.size());
  cross_pairs /= 2;
  const size_t n_nontarget = std::min(n_target, cross_pairs);
  Rng rng(DeriveSeed(seed, "trials"));
  std::set<std::pair<size_t, size_t>> used;
  while (used.size() < n_nontarget) {
    size_t a = UniformIndex(rng, manifest.size()), b = UniformIndex(rng, manifest.size());
    if (e[a].speaker_id == e[b].speaker_id) continue;
    if (!used.insert({std::min(a, b), std::max(a, b)}).second) continue;
    trials.push_back({e[a].utterance_id, e[b].utterance_id, false});
  }
  return trials;
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> ids, Matrix vectors)
    : ids_(std::move(ids)), vectors_(std::move(vectors)) {
  if (static_cast<Eigen::Index>(ids_.size()) != vectors_.rows())
    Fail(ErrorCode::kInvalidArgument, "embedding table has ", ids_.size(), " ids but ",
         vectors_.rows(), " rows");
  for (size_t i = 0; i < ids_.size(); ++i)
    if (!index_.emplace(ids_[i], i).second)
      Fail(ErrorCode::kInvalidArgument, "duplicate utterance id ", ids_[i]);
}

Vector EmbeddingTable::Get(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) Fail(ErrorCode::kNotFound, "no embedding for ", id);
  return vectors_.row(static_cast<Eigen::Index>(it->second)).transpose();
}

EmbeddingTable ExtractEmbeddings(const ModelParams& model, const Manifest& manifest,
                                 const FeatureConfig& features) {
  std::vector<std::string> ids, failed;
  std::vector<Vector> rows;
  for (const auto& e : manifest.entries()) {
    Waveform w;
    try {
      w = Resolve(manifest, e);
    } catch (const Error&) {
      failed.push_back(e.utterance_id);
      continue;
    }
    ids.push_back(e.utterance_id);
    rows.push_back(Encode(model, LogMel(w, features).frames));
  }
  if (!failed.empty())
    Fail(ErrorCode::kNotFound, "cannot resolve utterances: ", JoinIds(failed));
  Matrix m(static_cast<Eigen::Index>(rows.size()), model.embed.weight.rows());
  for (size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return EmbeddingTable(std::move(ids), std::move(m));
}

double CosineScore(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) Fail(ErrorCode::kInvalidArgument, "embedding sizes differ");
  return a.dot(b) / (std::max(a.norm(), kNormEpsilon) * std::max(b.norm(), kNormEpsilon));
}

std::vector<double> ScoreTrials(const EmbeddingTable& table, const std::vector<Trial>& trials) {
  std::set<std::string> missing;
  for (const auto& t : trials) {
    if (!table.Contains(t.enroll)) missing.insert(t.enroll);
    if (!table.Contains(t.test)) missing.insert(t.test);
  }
  if (!missing.empty())
    Fail(ErrorCode::kNotFound, "trial utterances not in the manifest: ",
         JoinIds({missing.begin(), missing.end()}));
  std::vector<double> scores;
  scores.reserve(trials.size());
  for (const auto& t : trials) scores.push_back(CosineScore(table.Get(t.enroll), table.Get(t.test)));
  return scores;
}

AsNormStats CohortStats(const Vector& e, const Matrix& cohort, int top_n) {
  if (top_n < 2 || cohort.rows() < top_n)
    Fail(ErrorCode::kInvalidArgument, "AS-norm needs cohort size >= top_n >= 2 (cohort ",
         cohort.rows(), ", top_n ", top_n, ")");
  std::vector<double> s(static_cast<size_t>(cohort.rows()));
  for (Eigen::Index i = 0; i < cohort.rows(); ++i)
    s[static_cast<size_t>(i)] = CosineScore(e, cohort.row(i).transpose());
  std::partial_sort(s.begin(), s.begin() + top_n, s.end(), std::greater<double>());
  AsNormStats st;
  for (int i = 0; i < top_n; ++i) st.mean += s[static_cast<size_t>(i)];
  st.mean /= top_n;
  double var = 0.0;
  for (int i = 0; i < top_n; ++i) var += (s[static_cast<size_t>(i)] - st.mean) * (s[static_cast<size_t>(i)] - st.mean);
  st.stddev = std::sqrt(var / top_n);
  if (!(st.stddev >= kAsNormSigmaFloor)) {
    st.stddev = kAsNormSigmaFloor;
    st.floored = true;
  }
  return st;
}

double AsNormScore(double s, const AsNormStats& enroll, const AsNormStats& test) {
  return 0.5 * ((s - enroll.mean) / enroll.stddev + (s - test.mean) / test.stddev);
}

AsNormResult AsNorm(const EmbeddingTable& table, const std::vector<Trial>& trials,
                    const std::vector<double>& raw, const Matrix& cohort, int top_n) {
  if (raw.size() != trials.size())
    Fail(ErrorCode::kInvalidArgument, "score count differs from trial count");
  std::unordered_map<std::string, AsNormStats> cache;
  AsNormResult res;
  auto stats = [&](const std::string& id) -> const AsNormStats& {
    auto it = cache.find(id);
    if (it == cache.end()) {
      it = cache.emplace(id, CohortStats(table.Get(id), cohort, top_n)).first;
      res.sigma_floored = res.sigma_floored || it->second.floored;
    }
    return it->second;
  };
  res.scores.reserve(raw.size());
  for (size_t i = 0; i < trials.size(); ++i)
    res.scores.push_back(AsNormScore(raw[i], stats(trials[i].enroll), stats(trials[i].test)));
  if (res.sigma_floored)
    std::cerr << "warning: degenerate AS-norm cohort, standard deviation floored at "
              << kAsNormSigmaFloor << "\n";
  return res;
}

EerResult ComputeEer(const std::vector<double>& scores, const std::vector<bool>& targets) {
  std::vector<OperatingPoint> pts = SweepOperatingPoints(scores, targets);
  // Lower convex hull in the (p_fa, p_miss) plane, walked by increasing p_fa.
  std::reverse(pts.begin(), pts.end());
  std::vector<OperatingPoint> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2 && Cross(hull[hull.size() - 2], hull.back(), p) <= 0.0) hull.pop_back();
    hull.push_back(p);
  }
  for (size_t i = 0; i + 1 < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[i + 1];
    double da = a.p_miss - a.p_fa, db = b.p_miss - b.p_fa;
    if (da >= 0.0 && db <= 0.0) {
      double alpha = da > db ? da / (da - db) : 0.0;
      return {a.p_fa + alpha * (b.p_fa - a.p_fa), a.threshold + alpha * (b.threshold - a.threshold)};
    }
  }
  Fail(ErrorCode::kInternal, "ROC hull does not cross the diagonal");
}

double ComputeMinDcf(const std::vector<double>& scores, const std::vector<bool>& targets,
                     double p_target, double c_miss, double c_fa) {
  if (!(p_target > 0.0 && p_target < 1.0 && c_miss > 0.0 && c_fa > 0.0))
    Fail(ErrorCode::kInvalidArgument, "minDCF needs p_target in (0, 1) and positive costs");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : SweepOperatingPoints(scores, targets))
    best = std::min(best, c_miss * p.p_miss * p_target + c_fa * p.p_fa * (1.0 - p_target));
  return best / std::min(c_miss * p_target, c_fa * (1.0 - p_target));
}

NmiNormalization ParseNmiNormalization(const std::string& name) {
  if (name == "arithmetic") return NmiNormalization::kArithmetic;
  if (name == "geometric") return NmiNormalization::kGeometric;
  if (name == "max") return NmiNormalization::kMax;
  Fail(ErrorCode::kInvalidArgument, "unknown NMI normalization '", name, "'");
}

double Nmi(const std::vector<int>& a_raw, const std::vector<int>& b_raw, NmiNormalization norm) {
  if (a_raw.size() != b_raw.size())
    Fail(ErrorCode::kInvalidArgument, "labelings have different lengths");
  if (a_raw.empty()) Fail(ErrorCode::kInvalidArgument, "empty labelings");
  int na = 0, nb = 0;
  std::vector<int> a = Compact(a_raw, &na), b = Compact(b_raw, &nb);
  const double n = static_cast<double>(a.size());
  std::vector<double> ca(static_cast<size_t>(na), 0.0), cb(static_cast<size_t>(nb), 0.0);
  std::vector<double> joint(static_cast<size_t>(na) * static_cast<size_t>(nb), 0.0);
  for (size_t i = 0; i < a.size(); ++i) {
    ca[static_cast<size_t>(a[i])] += 1.0;
    cb[static_cast<size_t>(b[i])] += 1.0;
    joint[static_cast<size_t>(a[i]) * static_cast<size_t>(nb) + static_cast<size_t>(b[i])] += 1.0;
  }
  const double ha = EntropyOfCounts(ca, n), hb = EntropyOfCounts(cb, n);
  if (ha == 0.0 || hb == 0.0) return SamePartition(a, b) ? 1.0 : 0.0;
  double mi = 0.0;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) {
      double c = joint[static_cast<size_t>(i) * static_cast<size_t>(nb) + static_cast<size_t>(j)];
      if (c > 0.0) mi += (c / n) * std::log(c * n / (ca[static_cast<size_t>(i)] * cb[static_cast<size_t>(j)]));
    }
  double denom = 0.0;
  switch (norm) {
    case NmiNormalization::kArithmetic: denom = 0.5 * (ha + hb); break;
    case NmiNormalization::kGeometric: denom = std::sqrt(ha * hb); break;
    case NmiNormalization::kMax: denom = std::max(ha, hb); break;
  }
  return std::clamp(mi / denom, 0.0, 1.0);
}

std::pair<int, int> TopTwo(const Vector& p) {
  if (p.size() < 2) Fail(ErrorCode::kInvalidArgument, "top-2 needs at least two dimensions");
  int first = 0;
  for (int k = 1; k < p.size(); ++k)
    if (p(k) > p(first)) first = k;
  int second = first == 0 ? 1 : 0;
  for (int k = 0; k < p.size(); ++k)
    if (k != first && p(k) > p(second)) second = k;
  return {std::min(first, second), std::max(first, second)};
}

PseudoLabels PseudoLabelsFromProbs(std::vector<std::string> ids, std::vector<Vector> probs) {
  PseudoLabels pl;
  pl.ids = std::move(ids);
  pl.probs = std::move(probs);
  std::set<int> d1;
  std::set<std::pair<int, int>> d2;
  for (const auto& p : pl.probs) {
    Eigen::Index k;
    p.maxCoeff(&k);  // first maximum, so ties go to the lower index
    pl.top1.push_back(static_cast<int>(k));
    pl.top2.push_back(TopTwo(p));
    d1.insert(pl.top1.back());
    d2.insert(pl.top2.back());
  }
  pl.distinct_top1 = static_cast<int>(d1.size());
  pl.distinct_top2 = static_cast<int>(d2.size());
  return pl;
}

PseudoLabels ComputePseudoLabels(const ModelParams& teacher, const Vector& center, double tau_t,
                                 const Manifest& manifest, const FeatureConfig& features) {
  if (!teacher.has_head()) Fail(ErrorCode::kInvalidArgument, "pseudo labels need a projection head");
  if (center.size() != teacher.prototypes.rows())
    Fail(ErrorCode::kInvalidArgument, "center dimension does not match the head");
  std::vector<std::string> ids;
  std::vector<Vector> probs;
  for (const auto& e : manifest.entries()) {
    Vector q = Project(teacher, Encode(teacher, LogMel(Resolve(manifest, e), features).frames));
    probs.push_back(Sharpen(q - center, tau_t));
    ids.push_back(e.utterance_id);
  }
  return PseudoLabelsFromProbs(std::move(ids), std::move(probs));
}

CollapseMetrics CollapseReport(const std::vector<Vector>& probs) {
  if (probs.empty()) Fail(ErrorCode::kInvalidArgument, "empty probe batch");
  CollapseMetrics m;
  std::map<int, int> counts;
  for (const auto& p : probs) {
    double h = Entropy(p);
    m.entropy += h;
    m.kl_uniform += std::log(static_cast<double>(p.size())) - h;
    Eigen::Index k;
    p.maxCoeff(&k);
    ++counts[static_cast<int>(k)];
  }
  int mode = 0;
  for (const auto& [k, c] : counts) mode = std::max(mode, c);
  const double n = static_cast<double>(probs.size());
  m.entropy /= n;
  m.kl_uniform /= n;
  m.maxdim_freq = mode / n;
  return m;
}

std::vector<int> SpeakerLabels(const Manifest& manifest, const std::vector<std::string>& ids) {
  std::map<std::string, int> cls;
  for (const auto& s : manifest.SpeakerIds()) cls.emplace(s, static_cast<int>(cls.size()));
  std::vector<int> out;
  for (const auto& id : ids) out.push_back(cls.at(manifest.Find(id).speaker_id));
  return out;
}

std::string FormatReport(const EvalReport& r) {
  std::ostringstream os;
  auto line = [&os](const std::string& key, const std::string& value) {
    os << key << '\t' << value << '\n';
  };
  line("trials", std::to_string(r.n_trials));
  line("target_trials", std::to_string(r.n_targets));
  line("eer_percent", FormatDouble(100.0 * r.eer.eer));
  line("eer_threshold", FormatDouble(r.eer.threshold));
  line("min_dcf_p0.05", FormatDouble(r.min_dcf));
  if (r.has_asnorm) {
    line("asnorm_eer_percent", FormatDouble(100.0 * r.eer_asnorm.eer));
    line("asnorm_min_dcf_p0.05", FormatDouble(r.min_dcf_asnorm));
    line("asnorm_sigma_floored", r.asnorm_sigma_floored ? "yes" : "no");
  }
  if (r.has_pseudo) {
    line("nmi_" + r.nmi_normalization, FormatDouble(r.nmi));
    line("true_speakers", std::to_string(r.n_speakers));
    line("pseudo_speakers_top1", std::to_string(r.distinct_top1));
    line("pseudo_speakers_top2", std::to_string(r.distinct_top2));
    line("teacher_entropy", FormatDouble(r.collapse.entropy));
    line("teacher_maxdim_freq", FormatDouble(r.collapse.maxdim_freq));
    line("teacher_kl_uniform", FormatDouble(r.collapse.kl_uniform));
  }
  return os.str();
}

EvalReport Evaluate(const RunConfig& cfg, const std::string& checkpoint_path,
                    const std::string& trials_path, const std::string& out_dir) {
  cfg.Validate();
  Checkpoint ckpt = LoadCheckpoint(checkpoint_path);
  Manifest eval = LoadCorpus(cfg.eval_corpus, 0.0);
  std::string trial_file = trials_path.empty() ? cfg.trials : trials_path;
  std::vector<Trial> trials =
      trial_file.empty() ? GenerateTrials(eval, cfg.trials_seed) : ReadTrials(trial_file);

  EmbeddingTable table = ExtractEmbeddings(ckpt.student, eval, cfg.features);
  std::vector<double> scores = ScoreTrials(table, trials);
  std::vector<bool> labels;
  for (const auto& t : trials) labels.push_back(t.target);

  EvalReport r;
  r.n_trials = trials.size();
  r.n_targets = static_cast<size_t>(std::count(labels.begin(), labels.end(), true));
  r.eer = ComputeEer(scores, labels);
  r.min_dcf = ComputeMinDcf(scores, labels, 0.05);

  std::vector<double> normed;
  if (cfg.cohort_size > 0) {
    Manifest train = LoadCorpus(cfg.corpus, 0.0);
    std::vector<size_t> pick(train.size());
    std::iota(pick.begin(), pick.end(), size_t{0});
    Rng rng(DeriveSeed(cfg.seed, "cohort"));
    Shuffle(pick.begin(), pick.end(), rng);
    pick.resize(std::min(pick.size(), static_cast<size_t>(cfg.cohort_size)));
    std::sort(pick.begin(), pick.end());
    Manifest cohort_manifest;
    cohort_manifest.set_base_dir(train.base_dir());
    for (size_t i : pick) cohort_manifest.Add(train.entries()[i]);
    Matrix cohort = ExtractEmbeddings(ckpt.student, cohort_manifest, cfg.features).vectors();
    int top_n = std::min(cfg.asnorm_top_n, static_cast<int>(cohort.rows()));
    if (top_n >= 2) {
      AsNormResult an = AsNorm(table, trials, scores, cohort, top_n);
      normed = an.scores;
      r.has_asnorm = true;
      r.asnorm_sigma_floored = an.sigma_floored;
      r.eer_asnorm = ComputeEer(an.scores, labels);
      r.min_dcf_asnorm = ComputeMinDcf(an.scores, labels, 0.05);
    }
  }

  if (ckpt.teacher && ckpt.teacher->has_head() && ckpt.center) {
    PseudoLabels pl = ComputePseudoLabels(*ckpt.teacher, *ckpt.center, cfg.dino.tau_t_end, eval,
                                          cfg.features);
    r.has_pseudo = true;
    r.nmi_normalization = cfg.nmi_normalization;
    r.nmi = Nmi(pl.top1, SpeakerLabels(eval, pl.ids), ParseNmiNormalization(cfg.nmi_normalization));
    r.n_speakers = static_cast<int>(eval.SpeakerIds().size());
    r.distinct_top1 = pl.distinct_top1;
    r.distinct_top2 = pl.distinct_top2;
    r.collapse = CollapseReport(pl.probs);
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream sc((std::filesystem::path(out_dir) / "scores.txt").string(), std::ios::binary);
    for (size_t i = 0; i < trials.size(); ++i) {
      sc << trials[i].enroll << ' ' << trials[i].test << ' ' << FormatDouble(scores[i]);
      if (!normed.empty()) sc << ' ' << FormatDouble(normed[i]);
      sc << '\n';
    }
    std::ofstream rep((std::filesystem::path(out_dir) / "report.txt").string(), std::ios::binary);
    rep << FormatReport(r);
    if (!sc || !rep) Fail(ErrorCode::kIo, "cannot write evaluation output into ", out_dir);
  }
  return r;
}

}  // namespace spkdino
