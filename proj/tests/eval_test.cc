// eval_test.cc

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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "dino.h"

namespace spkdino {
namespace {

struct Point {
  double fa, miss;
};

// Every operating point reachable by a threshold "accept if score >= t".
std::vector<Point> AllPoints(const std::vector<double>& s, const std::vector<bool>& t) {
  std::vector<double> thresholds = s;
  thresholds.push_back(std::numeric_limits<double>::infinity());
  double nt = 0, nn = 0;
  for (bool b : t) (b ? nt : nn) += 1;
  std::vector<Point> pts;
  for (double th : thresholds) {
    double miss = 0, fa = 0;
    for (size_t i = 0; i < s.size(); ++i) {
      bool accept = s[i] >= th;
      if (t[i] && !accept) miss += 1;
      if (!t[i] && accept) fa += 1;
    }
    pts.push_back({fa / nn, miss / nt});
  }
  return pts;
}

// Lowest point of the diagonal reachable by mixing two operating points.
double EerOracle(const std::vector<double>& s, const std::vector<bool>& t) {
  auto pts = AllPoints(s, t);
  double best = 1.0;
  for (const auto& a : pts)
    for (const auto& b : pts) {
      double da = a.miss - a.fa, db = b.miss - b.fa;
      if (da < 0 || db > 0) continue;
      double x = da == db ? a.fa : a.fa + da / (da - db) * (b.fa - a.fa);
      best = std::min(best, x);
    }
  return best;
}

double DcfOracle(const std::vector<double>& s, const std::vector<bool>& t, double p) {
  double best = 1e300;
  for (const auto& pt : AllPoints(s, t)) best = std::min(best, pt.miss * p + pt.fa * (1 - p));
  return best / std::min(p, 1 - p);
}

std::vector<double> RandomScores(size_t n, uint64_t seed, std::vector<bool>* targets) {
  Rng rng(seed);
  std::vector<double> s(n);
  targets->assign(n, false);
  for (size_t i = 0; i < n; ++i) {
    // Index 1 is always a non-target, index 0 always a target.
    (*targets)[i] = i % 2 == 0 || (i % 4 == 3 && UniformIndex(rng, 2) == 0);
    // Coarse values so that ties appear.
    s[i] = std::round(4 * (Gaussian(rng) + ((*targets)[i] ? 1.0 : 0.0))) / 4;
  }
  return s;
}

TEST(Cosine, Examples) {
  Vector v(3);
  v << 1, -2, 0.5;
  EXPECT_NEAR(CosineScore(v, v), 1.0, 1e-15);
  EXPECT_NEAR(CosineScore(v, -v), -1.0, 1e-15);
  Vector a(2), b(2);
  a << 1, 0;
  b << 1, 1;
  EXPECT_NEAR(CosineScore(a, b), 0.70711, 1e-5);
  EXPECT_EQ(CosineScore(Vector::Zero(2), b), 0.0);
}

TEST(Eer, HandExamples) {
  EXPECT_NEAR(ComputeEer({0.8, 0.6, 0.7, 0.1}, {true, true, false, false}).eer, 0.25, 1e-12);
  EXPECT_EQ(ComputeEer({0.9, 0.8, 0.2, 0.1}, {true, true, false, false}).eer, 0.0);
  EXPECT_NEAR(ComputeEer({0.5, 0.5, 0.5, 0.5}, {true, false, false, true}).eer, 0.5, 1e-12);
  // The hull never does worse than chance.
  EXPECT_NEAR(ComputeEer({0.1, 0.2, 0.8, 0.9}, {true, true, false, false}).eer, 0.5, 1e-12);
  EXPECT_THROW(ComputeEer({0.1, 0.2}, {true, true}), Error);
}

TEST(Eer, ThresholdSeparatesAtTheCrossing) {
  EerResult r = ComputeEer({0.9, 0.8, 0.2, 0.1}, {true, true, false, false});
  EXPECT_GT(r.threshold, 0.2);
  EXPECT_LT(r.threshold, 0.8);
}

TEST(Eer, MatchesBruteForceOracle) {
  for (uint64_t seed = 0; seed < 40; ++seed) {
    std::vector<bool> t;
    auto s = RandomScores(4 + seed % 17, seed, &t);
    EXPECT_NEAR(ComputeEer(s, t).eer, EerOracle(s, t), 1e-9) << seed;
  }
}

TEST(Eer, MonotoneTransformInvariance) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<bool> t;
    auto s = RandomScores(20, seed + 100, &t);
    double base = ComputeEer(s, t).eer;
    std::vector<double> affine, cube;
    for (double v : s) {
      affine.push_back(3.0 * v - 7.0);
      cube.push_back(v * v * v);
    }
    EXPECT_NEAR(ComputeEer(affine, t).eer, base, 1e-12);
    EXPECT_NEAR(ComputeEer(cube, t).eer, base, 1e-12);
  }
}

TEST(MinDcf, HandExamplesAndOracle) {
  EXPECT_EQ(ComputeMinDcf({0.9, 0.8, 0.2, 0.1}, {true, true, false, false}), 0.0);
  // Fully inverted scores: the best is accepting or rejecting everything.
  EXPECT_NEAR(ComputeMinDcf({0.1, 0.2, 0.8, 0.9}, {true, true, false, false}), 1.0, 1e-12);
  std::vector<double> s{0.3, 0.9, 0.5, 0.4};
  std::vector<bool> t{true, true, false, false};
  EXPECT_NEAR(ComputeMinDcf(s, t, 0.05), DcfOracle(s, t, 0.05), 1e-9);
  for (uint64_t seed = 0; seed < 40; ++seed) {
    std::vector<bool> tt;
    auto ss = RandomScores(4 + seed % 17, seed + 7, &tt);
    double d = ComputeMinDcf(ss, tt, 0.05);
    EXPECT_NEAR(d, DcfOracle(ss, tt, 0.05), 1e-9) << seed;
    EXPECT_LE(d, 1.0 + 1e-12);
    EXPECT_EQ(d == 0.0, ComputeEer(ss, tt).eer == 0.0) << seed;
  }
  EXPECT_THROW(ComputeMinDcf(s, t, 0.0), Error);
}

double NmiOracle(const std::vector<std::vector<double>>& table) {
  double n = 0;
  std::vector<double> ra(table.size(), 0), cb(table[0].size(), 0);
  for (size_t i = 0; i < table.size(); ++i)
    for (size_t j = 0; j < table[i].size(); ++j) {
      n += table[i][j];
      ra[i] += table[i][j];
      cb[j] += table[i][j];
    }
  double mi = 0, ha = 0, hb = 0;
  for (size_t i = 0; i < table.size(); ++i)
    for (size_t j = 0; j < table[i].size(); ++j) {
      double p = table[i][j] / n;
      if (p > 0) mi += p * std::log(p / ((ra[i] / n) * (cb[j] / n)));
    }
  for (double r : ra) ha -= r / n * std::log(r / n);
  for (double c : cb) hb -= c / n * std::log(c / n);
  return 2 * mi / (ha + hb);
}

TEST(Nmi, Examples) {
  EXPECT_NEAR(Nmi({0, 0, 1, 1, 2}, {5, 5, 3, 3, 9}), 1.0, 1e-12);
  EXPECT_EQ(Nmi({1, 1, 1, 1}, {0, 1, 0, 1}), 0.0);
  EXPECT_EQ(Nmi({4, 4, 4}, {7, 7, 7}), 1.0);
  std::vector<int> a, b;
  const int table[2][2] = {{5, 1}, {1, 5}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int c = 0; c < table[i][j]; ++c) {
        a.push_back(i);
        b.push_back(j);
      }
  EXPECT_NEAR(Nmi(a, b), NmiOracle({{5, 1}, {1, 5}}), 1e-12);
  EXPECT_THROW(Nmi({1}, {1, 2}), Error);
}

TEST(Nmi, SymmetryRenamingAndVariants) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> a(18), b(18);
    std::vector<std::vector<double>> table(4, std::vector<double>(3, 0.0));
    for (size_t i = 0; i < a.size(); ++i) {
      a[i] = static_cast<int>(UniformIndex(rng, 4));
      b[i] = static_cast<int>(UniformIndex(rng, 3));
      table[a[i]][b[i]] += 1;
    }
    // Drop empty rows and columns for the oracle.
    std::vector<std::vector<double>> t2;
    for (auto& r : table) {
      double s = 0;
      for (double v : r) s += v;
      if (s > 0) t2.push_back(r);
    }
    std::vector<std::vector<double>> t3(t2.size());
    for (size_t j = 0; j < 3; ++j) {
      double s = 0;
      for (auto& r : t2) s += r[j];
      if (s == 0) continue;
      for (size_t i = 0; i < t2.size(); ++i) t3[i].push_back(t2[i][j]);
    }
    double n = Nmi(a, b);
    if (t3.size() > 1 && t3[0].size() > 1) EXPECT_NEAR(n, NmiOracle(t3), 1e-9);
    EXPECT_NEAR(n, Nmi(b, a), 1e-12);
    std::vector<int> renamed;
    for (int v : a) renamed.push_back(100 - 7 * v);
    EXPECT_NEAR(n, Nmi(renamed, b), 1e-12);
    double g = Nmi(a, b, NmiNormalization::kGeometric), m = Nmi(a, b, NmiNormalization::kMax);
    // Larger denominators give smaller scores: max >= arithmetic >= geometric mean.
    EXPECT_LE(m, n + 1e-12);
    EXPECT_LE(n, g + 1e-12);
  }
  EXPECT_EQ(ParseNmiNormalization("max"), NmiNormalization::kMax);
  EXPECT_THROW(ParseNmiNormalization("min"), Error);
}

Matrix RowsOf(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<long>(rows.size()), static_cast<long>(rows.begin()->size()));
  long r = 0;
  for (const auto& row : rows) {
    long c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

TEST(AsNorm, HandExampleMatchesEnumeration) {
  Matrix cohort = RowsOf({{1, 0, 0}, {0, 1, 0}, {0.6, 0.8, 0}, {-1, 0.2, 0.4}});
  EmbeddingTable table({"a", "b", "c"}, RowsOf({{1, 0.5, 0}, {0.2, 1, -0.3}, {-0.5, 0.1, 1}}));
  std::vector<Trial> trials = {{"a", "b", true}, {"a", "c", false}, {"b", "c", false}};
  std::vector<double> raw = ScoreTrials(table, trials);
  const int top_n = 3;
  auto stats = [&](const std::string& id) {
    std::vector<double> s;
    for (long i = 0; i < cohort.rows(); ++i) {
      Vector e = table.Get(id), c = cohort.row(i).transpose();
      s.push_back(e.dot(c) / (e.norm() * c.norm()));
    }
    std::sort(s.rbegin(), s.rend());
    double mu = (s[0] + s[1] + s[2]) / 3, var = 0;
    for (int i = 0; i < 3; ++i) var += (s[i] - mu) * (s[i] - mu);
    return std::pair{mu, std::sqrt(var / 3)};
  };
  AsNormResult r = AsNorm(table, trials, raw, cohort, top_n);
  EXPECT_FALSE(r.sigma_floored);
  for (size_t i = 0; i < trials.size(); ++i) {
    auto [me, se] = stats(trials[i].enroll);
    auto [mt, st] = stats(trials[i].test);
    double expected = 0.5 * ((raw[i] - me) / se + (raw[i] - mt) / st);
    EXPECT_NEAR(r.scores[i], expected, 1e-9) << i;
  }
}

TEST(AsNorm, Degenerate) {
  AsNormStats s{0.3, 0.2, false};
  EXPECT_EQ(AsNormScore(0.3, s, s), 0.0);
  Matrix same = RowsOf({{1, 2}, {1, 2}, {1, 2}});
  AsNormStats f = CohortStats(Vector::Ones(2), same, 3);
  EXPECT_TRUE(f.floored);
  EXPECT_EQ(f.stddev, kAsNormSigmaFloor);
  EXPECT_THROW(CohortStats(Vector::Ones(2), same, 4), Error);
  EXPECT_THROW(CohortStats(Vector::Ones(2), same, 1), Error);

  // Per-side affine maps keep each enrollment's ranking.
  EmbeddingTable table({"e", "t1", "t2", "t3"},
                       RowsOf({{1, 0}, {0.9, 0.1}, {0.1, 0.9}, {0.5, 0.5}}));
  std::vector<Trial> trials = {{"e", "t1", true}, {"e", "t2", false}, {"e", "t3", false}};
  auto raw = ScoreTrials(table, trials);
  AsNormResult r = AsNorm(table, trials, raw, same, 2);
  EXPECT_TRUE(r.sigma_floored);
  for (size_t i = 0; i < 3; ++i)
    for (size_t j = 0; j < 3; ++j)
      if (raw[i] < raw[j]) EXPECT_LT(r.scores[i], r.scores[j]);
}

TEST(AsNorm, FullCohortIsZNorm) {
  Matrix cohort = RowsOf({{1, 0}, {0, 1}, {1, 1}, {-1, 2}});
  Vector e(2);
  e << 0.3, 0.8;
  AsNormStats s = CohortStats(e, cohort, 4);
  std::vector<double> all;
  for (long i = 0; i < 4; ++i) all.push_back(CosineScore(e, cohort.row(i).transpose()));
  double mu = (all[0] + all[1] + all[2] + all[3]) / 4, var = 0;
  for (double v : all) var += (v - mu) * (v - mu);
  EXPECT_NEAR(s.mean, mu, 1e-12);
  EXPECT_NEAR(s.stddev, std::sqrt(var / 4), 1e-12);
}

TEST(Trials, GenerateAndRoundTrip) {
  Manifest m = SynthCorpus(3, 3, 6.0, 5);
  auto trials = GenerateTrials(m, 1);
  size_t targets = 0;
  for (const auto& t : trials) {
    bool same = m.Find(t.enroll).speaker_id == m.Find(t.test).speaker_id;
    EXPECT_EQ(same, t.target);
    EXPECT_NE(t.enroll, t.test);
    targets += t.target;
  }
  EXPECT_EQ(targets, 9u);  // 3 speakers x C(3, 2)
  EXPECT_EQ(trials.size(), 18u);
  const std::string path =
      (std::filesystem::temp_directory_path() / "spkdino_eval_test.trials").string();
  WriteTrials(trials, path);
  auto back = ReadTrials(path);
  ASSERT_EQ(back.size(), trials.size());
  for (size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].enroll, trials[i].enroll);
    EXPECT_EQ(back[i].target, trials[i].target);
  }
  std::filesystem::remove(path);
  EXPECT_EQ(GenerateTrials(m, 1).size(), trials.size());
}

TEST(Trials, MissingIdsAreListed) {
  EmbeddingTable table({"a"}, RowsOf({{1, 0}}));
  try {
    ScoreTrials(table, {{"a", "ghost", false}, {"phantom", "a", true}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("phantom"), std::string::npos);
  }
}

TEST(PseudoLabels, TopOneTopTwoAndCounts) {
  Vector hot = Vector::Zero(5);
  hot(3) = 1;
  Vector tie(5);
  tie << 0.1, 0.3, 0.3, 0.3, 0.0;
  EXPECT_EQ(TopTwo(tie), std::make_pair(1, 2));
  Vector rev(5);
  rev << 0.05, 0.1, 0.15, 0.3, 0.4;
  EXPECT_EQ(TopTwo(rev), std::make_pair(3, 4));
  PseudoLabels pl = PseudoLabelsFromProbs({"u1", "u2", "u3"}, {hot, tie, rev});
  EXPECT_EQ(pl.top1, (std::vector<int>{3, 1, 4}));
  EXPECT_EQ(pl.distinct_top1, 3);
  EXPECT_LE(pl.distinct_top2, 3);
  PseudoLabels same = PseudoLabelsFromProbs({"a", "b"}, {hot, hot});
  EXPECT_EQ(same.distinct_top1, 1);
}

TEST(Collapse, Metrics) {
  std::vector<Vector> uniform(4, Vector::Constant(8, 1.0 / 8));
  CollapseMetrics u = CollapseReport(uniform);
  EXPECT_NEAR(u.entropy, std::log(8.0), 1e-12);
  EXPECT_NEAR(u.kl_uniform, 0.0, 1e-12);
  Vector hot = Vector::Zero(8);
  hot(2) = 1;
  CollapseMetrics h = CollapseReport({hot, hot, hot});
  EXPECT_EQ(h.entropy, 0.0);
  EXPECT_EQ(h.maxdim_freq, 1.0);

  Rng rng(4);
  std::vector<Vector> mixed;
  for (int i = 0; i < 6; ++i) {
    Vector q(8);
    for (long k = 0; k < 8; ++k) q(k) = Gaussian(rng);
    mixed.push_back(Sharpen(q, 0.5));
  }
  mixed.push_back(hot);
  CollapseMetrics m = CollapseReport(mixed);
  double h_sum = 0, kl_sum = 0;
  std::map<long, int> counts;
  for (const auto& p : mixed) {
    double hp = 0, kl = 0;
    for (long k = 0; k < 8; ++k)
      if (p(k) > 0) {
        hp -= p(k) * std::log(p(k));
        kl += p(k) * std::log(p(k) * 8);
      }
    h_sum += hp;
    kl_sum += kl;
    long arg = 0;
    p.maxCoeff(&arg);
    ++counts[arg];
  }
  int mode = 0;
  for (auto& [k, c] : counts) mode = std::max(mode, c);
  EXPECT_NEAR(m.entropy, h_sum / 7, 1e-12);
  EXPECT_NEAR(m.kl_uniform, kl_sum / 7, 1e-12);
  EXPECT_NEAR(m.maxdim_freq, mode / 7.0, 1e-12);
  EXPECT_THROW(CollapseReport({}), Error);
}

TEST(Embeddings, DeterministicAndSized) {
  ModelDims d;
  d.feat_dim = 40;
  d.channels = 8;
  d.embed_dim = 6;
  ModelParams model = InitModel(d, 3, false);
  Manifest m = SynthCorpus(2, 2, 6.0, 8);
  EmbeddingTable a = ExtractEmbeddings(model, m, FeatureConfig());
  EmbeddingTable b = ExtractEmbeddings(model, m, FeatureConfig());
  EXPECT_EQ(a.vectors(), b.vectors());
  EXPECT_EQ(a.vectors().cols(), 6);
  EXPECT_EQ(a.ids().size(), 4u);
  EXPECT_THROW(a.Get("nope"), Error);
}

}  // namespace
}  // namespace spkdino
