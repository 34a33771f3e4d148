// config_test.cc

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

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

namespace spkdino {
namespace {

TEST(Config, DefaultsValidate) {
  RunConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  EXPECT_EQ(cfg.segments.n_long, 2);
  EXPECT_EQ(cfg.segments.n_short, 4);
  EXPECT_EQ(cfg.dino.tau_s, 0.1);
  EXPECT_EQ(cfg.dino.tau_t_start, 0.04);
  EXPECT_EQ(cfg.dino.tau_t_end, 0.07);
  EXPECT_EQ(cfg.dino.center_momentum, 0.9);
  EXPECT_EQ(cfg.dino.lambda_start, 0.996);
  EXPECT_EQ(cfg.dino.lambda_end, 1.0);
  EXPECT_EQ(cfg.segments.long_seconds, 3.0);
  EXPECT_EQ(cfg.segments.short_seconds, 2.0);
  EXPECT_EQ(cfg.lr_start, 0.002);
  EXPECT_EQ(cfg.lr_end, 5e-6);
  EXPECT_EQ(cfg.momentum, 0.9);
  EXPECT_EQ(cfg.weight_decay, 0.0);
  EXPECT_TRUE(cfg.data_init);
  EXPECT_EQ(cfg.model.k, 256);
}

TEST(Config, SerializationRoundTripsEveryKey) {
  RunConfig cfg;
  ApplyConfigText(&cfg,
                  "# comment\n\nseed = 42\naug.pitch_cents=-100,50.5\nmodel.tdnn=3:1,2:4\n"
                  "dino.centering=false\nmode=aam_finetune\neval.trials=/x/y\n"
                  "optim.lr_start=0.125\n");
  std::string text = SerializeConfig(cfg);
  RunConfig back = ParseConfig(text);
  EXPECT_EQ(SerializeConfig(back), text);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.augment.pitch_cents, (std::vector<double>{-100.0, 50.5}));
  ASSERT_EQ(back.model.tdnn.size(), 2u);
  EXPECT_EQ(back.model.tdnn[1].dilation, 4);
  EXPECT_FALSE(back.dino.centering);
  EXPECT_EQ(back.mode, RunMode::kAamFinetune);
  EXPECT_EQ(back.trials, "/x/y");

  std::set<std::string> names;
  for (const auto& k : ConfigKeys()) {
    EXPECT_TRUE(names.insert(k.name).second) << k.name;
    EXPECT_FALSE(k.doc.empty()) << k.name;
    EXPECT_EQ(GetConfigValue(back, k.name), k.get(back));
  }
}

TEST(Config, DoublesSurviveExactly) {
  RunConfig cfg;
  cfg.lr_end = 0.1 + 0.2;
  cfg.dino.tau_t_warm_fraction = 1.0 / 3.0;
  RunConfig back = ParseConfig(SerializeConfig(cfg));
  EXPECT_EQ(back.lr_end, cfg.lr_end);
  EXPECT_EQ(back.dino.tau_t_warm_fraction, cfg.dino.tau_t_warm_fraction);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  RunConfig cfg;
  EXPECT_THROW(SetConfigValue(&cfg, "no.such.key", "1"), Error);
  EXPECT_THROW(SetConfigValue(&cfg, "seed", "abc"), Error);
  EXPECT_THROW(SetConfigValue(&cfg, "dino.centering", "maybe"), Error);
  EXPECT_THROW(SetConfigValue(&cfg, "mode", "train"), Error);
  EXPECT_THROW(SetConfigValue(&cfg, "model.tdnn", "3-1"), Error);
  EXPECT_THROW(ApplyConfigText(&cfg, "seed 3\n"), Error);
  try {
    SetConfigValue(&cfg, "bogus", "1");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
}

TEST(Config, ValidateCatchesInvariants) {
  auto invalid = [](const std::string& text) {
    RunConfig c = ParseConfig(text);
    EXPECT_THROW(c.Validate(), Error) << text;
  };
  invalid("train.epochs=0");
  invalid("train.batch_size=0");
  invalid("dino.center_momentum=1");
  invalid("dino.tau_t_start=0.1\ndino.tau_t_end=0.05");
  invalid("aug.p_pitch=2");
  invalid("seg.n_long=0");
  invalid("seg.short_seconds=4");
  invalid("model.k=1");
  invalid("eval.nmi_normalization=median");
  invalid("finetune.label_fraction=0");
  invalid("optim.momentum=1");
  invalid("optim.weight_decay=-1");
  invalid("corpus.speakers=1");
  RunConfig ok = ParseConfig("mode=aam_finetune\ntrain.epochs=0");
  EXPECT_NO_THROW(ok.Validate());
}

TEST(Config, FileIo) {
  const std::string path =
      (std::filesystem::temp_directory_path() / "spkdino_config_test.txt").string();
  RunConfig cfg;
  cfg.seed = 99;
  SaveConfig(cfg, path);
  EXPECT_EQ(LoadConfig(path).seed, 99u);
  std::filesystem::remove(path);
  EXPECT_THROW(LoadConfig(path), Error);
}

}  // namespace
}  // namespace spkdino
