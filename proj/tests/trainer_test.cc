// trainer_test.cc

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

#include "trainer.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace spkdino {
namespace {

namespace fs = std::filesystem;

RunConfig TinyConfig() {
  return ParseConfig(
      "corpus.speakers=2\ncorpus.utts_per_speaker=2\n"
      "model.channels=8\nmodel.tdnn=3:1,3:2\nmodel.embed_dim=8\nmodel.head_hidden=16\n"
      "model.bottleneck=8\nmodel.k=16\nfeat.n_mels=16\n"
      "aug.bank_size=2\ntrain.epochs=1\ntrain.batch_size=2\n");
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string TempDir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("spkdino_trainer_test_" + name);
  fs::remove_all(p);
  return p.string();
}

ModelDims DimsFor(const RunConfig& cfg) {
  ModelDims d = cfg.model;
  d.feat_dim = cfg.features.n_mels;
  return d;
}

TEST(Train, StepCountAndLogFormat) {
  const std::string dir = TempDir("count");
  TrainResult r = TrainDino(TinyConfig(), {dir, "", -1, false});
  EXPECT_EQ(r.total_steps, 2);
  ASSERT_EQ(r.log.size(), 2u);
  std::string log = Slurp(dir + "/train_log.tsv");
  EXPECT_NE(log.find("# k=16\n"), std::string::npos);
  EXPECT_NE(log.find("step\tloss\tteacher_entropy\tlambda\tlr\ttau_t"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir + "/checkpoint.bin"));
  EXPECT_TRUE(fs::exists(dir + "/config.txt"));
  for (const auto& row : r.log) {
    EXPECT_TRUE(std::isfinite(row.loss));
    EXPECT_GT(row.teacher_entropy, 0.0);
    EXPECT_LE(row.teacher_entropy, std::log(16.0) + 1e-12);
  }
  EXPECT_EQ(r.log[0].lambda, 0.996);
  EXPECT_EQ(r.log[0].lr, 0.002);
  // Two steps: the 20 % warm-up rounds to zero steps, so tau_t starts at its end value.
  EXPECT_EQ(r.log[0].tau_t, 0.07);
  fs::remove_all(dir);
}

TEST(Train, DeterministicAcrossRuns) {
  RunConfig cfg = TinyConfig();
  cfg.epochs = 2;
  const std::string a = TempDir("det_a"), b = TempDir("det_b");
  TrainDino(cfg, {a, "", -1, false});
  TrainDino(cfg, {b, "", -1, false});
  EXPECT_EQ(Slurp(a + "/checkpoint.bin"), Slurp(b + "/checkpoint.bin"));
  EXPECT_EQ(Slurp(a + "/train_log.tsv"), Slurp(b + "/train_log.tsv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Train, ResumeReproducesTheUninterruptedRun) {
  RunConfig cfg = TinyConfig();
  cfg.epochs = 2;
  const std::string full = TempDir("full"), part = TempDir("part");
  TrainDino(cfg, {full, "", -1, false});
  TrainResult first = TrainDino(cfg, {part, "", 1, false});
  EXPECT_EQ(first.steps_done, 1);
  ASSERT_TRUE(fs::exists(part + "/checkpoint_step000001.bin"));
  TrainDino(cfg, {part, part + "/checkpoint_step000001.bin", -1, false});
  EXPECT_EQ(Slurp(full + "/checkpoint.bin"), Slurp(part + "/checkpoint.bin"));
  EXPECT_EQ(Slurp(full + "/train_log.tsv"), Slurp(part + "/train_log.tsv"));

  RunConfig other = cfg;
  other.seed = 8;
  EXPECT_THROW(TrainDino(other, {part, part + "/checkpoint_step000001.bin", -1, false}), Error);
  fs::remove_all(full);
  fs::remove_all(part);
}

TEST(Train, FrozenTeacherWithoutAugmentation) {
  RunConfig cfg = TinyConfig();
  cfg.augment.p_noise_reverb = 0.0;
  cfg.dino.lambda_start = 1.0;
  cfg.dino.lambda_end = 1.0;
  TrainResult r = TrainDino(cfg, {"", "", -1, false});
  ModelParams init = TrainDino(cfg, {"", "", 0, false}).teacher;
  EXPECT_EQ(ParamHash(r.teacher), ParamHash(init));
  EXPECT_NE(ParamHash(r.student), ParamHash(init));
}

TEST(Train, DataInitIsOptional) {
  RunConfig cfg = TinyConfig();
  ModelParams with = TrainDino(cfg, {"", "", 0, false}).student;
  cfg.data_init = false;
  TrainResult plain = TrainDino(cfg, {"", "", 0, false});
  EXPECT_EQ(ParamHash(plain.student), ParamHash(InitModel(DimsFor(cfg), DeriveSeed(cfg.seed, "init"))));
  EXPECT_EQ(ParamHash(plain.teacher), ParamHash(plain.student));
  EXPECT_NE(ParamHash(with), ParamHash(plain.student));
  // Same random draw underneath: the prototypes are not touched.
  EXPECT_EQ(with.prototypes, plain.student.prototypes);
}

TEST(Train, NumericBlowUpHalts) {
  RunConfig cfg = TinyConfig();
  cfg.lr_start = 1e308;
  cfg.lr_end = 1e308;
  try {
    TrainDino(cfg, {"", "", -1, false});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumeric);
  }
}

TEST(Train, CheckpointCadence) {
  RunConfig cfg = TinyConfig();
  cfg.epochs = 2;
  cfg.checkpoint_every = 1;
  const std::string dir = TempDir("cadence");
  TrainDino(cfg, {dir, "", -1, false});
  EXPECT_TRUE(fs::exists(dir + "/checkpoint_epoch001.bin"));
  EXPECT_TRUE(fs::exists(dir + "/checkpoint_epoch002.bin"));
  Checkpoint c = LoadCheckpoint(dir + "/checkpoint.bin");
  EXPECT_EQ(c.step, 4);
  EXPECT_TRUE(c.teacher && c.velocity && c.center);
  EXPECT_EQ(ParseConfig(c.config_text).epochs, 2);
  fs::remove_all(dir);
}

TEST(LabelledSubset, PerSpeakerCeiling) {
  Manifest m = SynthCorpus(3, 7, 6.0, 4);
  auto keep = LabelledSubset(m, 0.2, 1);
  EXPECT_EQ(keep.size(), 6u);  // ceil(0.2 * 7) = 2 per speaker
  std::map<std::string, int> per;
  for (size_t i : keep) ++per[m.entries()[i].speaker_id];
  for (const auto& [s, n] : per) EXPECT_EQ(n, 2);
  EXPECT_EQ(LabelledSubset(m, 0.2, 1), keep);
  EXPECT_EQ(LabelledSubset(m, 1.0, 1).size(), 21u);
}

RunConfig FinetuneConfig(const std::string& manifest) {
  RunConfig cfg = TinyConfig();
  cfg.mode = RunMode::kAamFinetune;
  cfg.corpus.manifest = manifest;
  cfg.label_fraction = 1.0;
  cfg.epochs = 1;
  return cfg;
}

TEST(Finetune, ZeroEpochsKeepsTheEncoder) {
  const std::string dir = TempDir("ft0");
  RunConfig pre = TinyConfig();
  TrainResult p = TrainDino(pre, {dir + "/pre", "", -1, false});
  RunConfig cfg = TinyConfig();
  cfg.mode = RunMode::kAamFinetune;
  cfg.epochs = 0;
  cfg.finetune_init = p.checkpoint_path;
  FinetuneResult f = FinetuneAam(cfg, {dir + "/ft", "", -1, false});
  EXPECT_FALSE(f.model.has_head());
  ASSERT_TRUE(f.model.has_aam());
  EXPECT_EQ(f.model.aam.rows(), 2);
  EXPECT_EQ(f.model.embed.weight, p.student.embed.weight);
  for (size_t i = 0; i < p.student.encoder.size(); ++i)
    EXPECT_EQ(f.model.encoder[i].weight, p.student.encoder[i].weight);
  for (long r = 0; r < f.model.aam.rows(); ++r) EXPECT_NEAR(f.model.aam.row(r).norm(), 1.0, 1e-12);
  Checkpoint c = LoadCheckpoint(dir + "/ft/checkpoint.bin");
  EXPECT_EQ(ParamHash(c.student), ParamHash(f.model));
  fs::remove_all(dir);
}

TEST(Finetune, LabelPermutationGivesTheSameTrajectory) {
  const std::string dir = TempDir("perm");
  fs::create_directories(dir);
  Manifest m = SynthCorpus(3, 2, 6.0, 9);
  // Rename speakers so that their sorted order, and so their class indices, change.
  const std::map<std::string, std::string> rename = {
      {m.SpeakerIds()[0], "zz"}, {m.SpeakerIds()[1], "aa"}, {m.SpeakerIds()[2], "mm"}};
  Manifest renamed;
  for (auto e : m.entries()) {
    e.speaker_id = rename.at(e.speaker_id);
    renamed.Add(e);
  }
  WriteManifest(m, dir + "/a.manifest");
  WriteManifest(renamed, dir + "/b.manifest");
  FinetuneResult a = FinetuneAam(FinetuneConfig(dir + "/a.manifest"), {"", "", -1, false});
  FinetuneResult b = FinetuneAam(FinetuneConfig(dir + "/b.manifest"), {"", "", -1, false});
  ASSERT_EQ(a.losses.size(), 3u);
  ASSERT_EQ(a.losses.size(), b.losses.size());
  for (size_t i = 0; i < a.losses.size(); ++i) EXPECT_NEAR(a.losses[i], b.losses[i], 1e-9);
  EXPECT_LT((a.model.embed.weight - b.model.embed.weight).cwiseAbs().maxCoeff(), 1e-9);
  fs::remove_all(dir);
}

TEST(Finetune, ClassCountMismatchIsRejected) {
  RunConfig cfg = TinyConfig();
  cfg.mode = RunMode::kAamFinetune;
  cfg.aam.n_classes = 5;
  EXPECT_THROW(FinetuneAam(cfg, {"", "", -1, false}), Error);
}

}  // namespace
}  // namespace spkdino
