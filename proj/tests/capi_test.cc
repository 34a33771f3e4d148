// capi_test.cc

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

// The C interface and the command-line tool built on it.

#include "spkdino/spkdino.h"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

constexpr const char* kTinyConfig =
    "corpus.speakers=2\ncorpus.utts_per_speaker=2\n"
    "model.channels=8\nmodel.tdnn=3:1,3:2\nmodel.embed_dim=8\nmodel.head_hidden=16\n"
    "model.bottleneck=8\nmodel.k=16\nfeat.n_mels=16\n"
    "aug.bank_size=2\ntrain.epochs=1\ntrain.batch_size=2\n"
    "eval.speakers=2\neval.utts_per_speaker=2\neval.cohort_size=4\neval.asnorm_top_n=2\n";

std::string TempDir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("spkdino_capi_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

spkdino_config* TinyConfig() {
  spkdino_config* cfg = nullptr;
  const std::string dir = TempDir("cfg");
  WriteText(dir + "/tiny.cfg", kTinyConfig);
  EXPECT_EQ(spkdino_config_load((dir + "/tiny.cfg").c_str(), &cfg), SPKDINO_OK);
  return cfg;
}

std::string Get(const spkdino_config* cfg, const char* key) {
  size_t needed = 0;
  EXPECT_EQ(spkdino_config_get(cfg, key, nullptr, 0, &needed), SPKDINO_OK);
  std::vector<char> buf(needed);
  EXPECT_EQ(spkdino_config_get(cfg, key, buf.data(), buf.size(), &needed), SPKDINO_OK);
  return std::string(buf.data());
}

struct Outcome {
  int exit_code = -1;
  std::string out;
};

// Runs the CLI with stderr discarded and returns its exit code and stdout.
Outcome RunCli(const std::string& args) {
  std::string cmd = std::string(SPKDINO_CLI_PATH) + " " + args + " 2>/dev/null";
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return o;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), p)) > 0) o.out.append(buf, n);
  int status = pclose(p);
  o.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

TEST(CApi, StatusStringsAndVersion) {
  EXPECT_STREQ(spkdino_status_string(SPKDINO_OK), "ok");
  EXPECT_STRNE(spkdino_status_string(SPKDINO_ERR_IO), "ok");
  EXPECT_GT(std::string(spkdino_version()).size(), 0u);
}

TEST(CApi, ConfigSetGet) {
  spkdino_config* cfg = nullptr;
  ASSERT_EQ(spkdino_config_create(&cfg), SPKDINO_OK);
  EXPECT_EQ(Get(cfg, "model.k"), "256");
  EXPECT_EQ(spkdino_config_set(cfg, "model.k", "64"), SPKDINO_OK);
  EXPECT_EQ(Get(cfg, "model.k"), "64");
  EXPECT_EQ(spkdino_config_set(cfg, "no.such.key", "1"), SPKDINO_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(spkdino_last_error()).find("no.such.key"), std::string::npos);
  EXPECT_EQ(spkdino_config_set(cfg, "model.k", "many"), SPKDINO_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(spkdino_config_set(cfg, nullptr, "1"), SPKDINO_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(spkdino_config_validate(cfg), SPKDINO_OK);
  EXPECT_STREQ(spkdino_last_error(), "");

  // Truncation still reports the full length.
  char small[3];
  size_t needed = 0;
  ASSERT_EQ(spkdino_config_get(cfg, "dino.tau_s", small, sizeof(small), &needed), SPKDINO_OK);
  EXPECT_EQ(needed, 4u);  // "0.1" + NUL
  EXPECT_STREQ(small, "0.");
  EXPECT_EQ(spkdino_config_get(cfg, "nope", small, sizeof(small), &needed),
            SPKDINO_ERR_INVALID_ARGUMENT);
  spkdino_config_destroy(cfg);
}

TEST(CApi, ConfigKeysAreListed) {
  const size_t n = spkdino_config_key_count();
  ASSERT_GT(n, 20u);
  bool found = false;
  for (size_t i = 0; i < n; ++i) {
    EXPECT_GT(std::string(spkdino_config_key_doc(i)).size(), 0u);
    if (std::string(spkdino_config_key_name(i)) == "dino.centering") found = true;
  }
  EXPECT_TRUE(found);
}

TEST(CApi, ConfigFileRoundTrip) {
  spkdino_config* cfg = TinyConfig();
  const std::string dir = TempDir("save");
  ASSERT_EQ(spkdino_config_save(cfg, (dir + "/saved.cfg").c_str()), SPKDINO_OK);
  spkdino_config* back = nullptr;
  ASSERT_EQ(spkdino_config_load((dir + "/saved.cfg").c_str(), &back), SPKDINO_OK);
  for (size_t i = 0; i < spkdino_config_key_count(); ++i)
    EXPECT_EQ(Get(cfg, spkdino_config_key_name(i)), Get(back, spkdino_config_key_name(i)));
  spkdino_config_destroy(cfg);
  spkdino_config_destroy(back);
  spkdino_config* missing = nullptr;
  EXPECT_EQ(spkdino_config_load("/nonexistent/spkdino.cfg", &missing), SPKDINO_ERR_IO);
  EXPECT_EQ(missing, nullptr);
}

TEST(CApi, TrainEvaluateEmbed) {
  spkdino_config* cfg = TinyConfig();
  const std::string dir = TempDir("train");
  ASSERT_EQ(spkdino_train(cfg, (dir + "/run").c_str(), nullptr, 0), SPKDINO_OK)
      << spkdino_last_error();
  const std::string ckpt = dir + "/run/checkpoint.bin";
  ASSERT_TRUE(fs::exists(ckpt));

  spkdino_report* rep = nullptr;
  ASSERT_EQ(spkdino_evaluate(cfg, ckpt.c_str(), nullptr, (dir + "/eval").c_str(), &rep),
            SPKDINO_OK)
      << spkdino_last_error();
  double eer = -1.0, dcf = -1.0, trials = 0.0;
  EXPECT_EQ(spkdino_report_get(rep, "eer_percent", &eer), SPKDINO_OK);
  EXPECT_EQ(spkdino_report_get(rep, "min_dcf_p0.05", &dcf), SPKDINO_OK);
  EXPECT_EQ(spkdino_report_get(rep, "trials", &trials), SPKDINO_OK);
  EXPECT_GE(eer, 0.0);
  EXPECT_LE(eer, 50.0);
  EXPECT_GE(dcf, 0.0);
  EXPECT_LE(dcf, 1.0);
  EXPECT_GT(trials, 0.0);
  double unused;
  EXPECT_EQ(spkdino_report_get(rep, "no_such_field", &unused), SPKDINO_ERR_NOT_FOUND);
  EXPECT_NE(std::string(spkdino_report_text(rep)).find("eer_percent\t"), std::string::npos);
  spkdino_report_destroy(rep);
  EXPECT_TRUE(fs::exists(dir + "/eval/scores.txt"));
  EXPECT_TRUE(fs::exists(dir + "/eval/report.txt"));

  spkdino_report* an = nullptr;
  ASSERT_EQ(spkdino_analyze((dir + "/run/train_log.tsv").c_str(), nullptr, &an), SPKDINO_OK);
  double collapse = -1.0;
  EXPECT_EQ(spkdino_report_get(an, "collapse", &collapse), SPKDINO_OK);
  EXPECT_TRUE(collapse == 0.0 || collapse == 1.0);
  spkdino_report_destroy(an);

  spkdino_model* model = nullptr;
  ASSERT_EQ(spkdino_model_load(ckpt.c_str(), &model), SPKDINO_OK);
  ASSERT_EQ(spkdino_model_embedding_dim(model), 8u);
  std::vector<double> tone(16000);
  for (size_t i = 0; i < tone.size(); ++i) tone[i] = 0.3 * std::sin(0.05 * i) + 0.01 * std::sin(0.7 * i);
  std::vector<double> a(8), b(8);
  ASSERT_EQ(spkdino_model_embed(model, tone.data(), tone.size(), 16000, a.data(), a.size()),
            SPKDINO_OK);
  ASSERT_EQ(spkdino_model_embed(model, tone.data(), tone.size(), 16000, b.data(), b.size()),
            SPKDINO_OK);
  EXPECT_EQ(a, b);
  for (double v : a) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(spkdino_model_embed(model, tone.data(), tone.size(), 16000, a.data(), 4),
            SPKDINO_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(spkdino_model_embed(model, tone.data(), 10, 16000, a.data(), a.size()),
            SPKDINO_ERR_INVALID_ARGUMENT);
  spkdino_model_destroy(model);

  spkdino_model* bad = nullptr;
  EXPECT_EQ(spkdino_model_load((dir + "/run/train_log.tsv").c_str(), &bad), SPKDINO_ERR_FORMAT);
  EXPECT_EQ(spkdino_model_load((dir + "/missing.bin").c_str(), &bad), SPKDINO_ERR_IO);
  spkdino_config_destroy(cfg);
}

TEST(CApi, SynthWritesManifests) {
  spkdino_config* cfg = TinyConfig();
  const std::string dir = TempDir("synth");
  ASSERT_EQ(spkdino_synth(cfg, dir.c_str(), 1), SPKDINO_OK) << spkdino_last_error();
  EXPECT_TRUE(fs::exists(dir + "/train.manifest"));
  EXPECT_TRUE(fs::exists(dir + "/eval.manifest"));
  EXPECT_TRUE(fs::exists(dir + "/eval.trials"));
  int wavs = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir + "/wav"))
    if (e.path().extension() == ".wav") ++wavs;
  EXPECT_EQ(wavs, 8);  // 2x2 training + 2x2 evaluation
  EXPECT_NE(Slurp(dir + "/train.manifest").find("wav/train/"), std::string::npos);
  spkdino_config_destroy(cfg);
}

TEST(CApi, NullArguments) {
  EXPECT_EQ(spkdino_config_create(nullptr), SPKDINO_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(spkdino_train(nullptr, "/tmp/x", nullptr, 0), SPKDINO_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(spkdino_analyze(nullptr, nullptr, nullptr), SPKDINO_ERR_INVALID_ARGUMENT);
  spkdino_config_destroy(nullptr);
  spkdino_report_destroy(nullptr);
  spkdino_model_destroy(nullptr);
  EXPECT_STREQ(spkdino_report_text(nullptr), "");
}

TEST(Cli, ExitCodes) {
  const std::string dir = TempDir("cli_codes");
  EXPECT_EQ(RunCli("").exit_code, 2);
  EXPECT_EQ(RunCli("frobnicate").exit_code, 2);
  EXPECT_EQ(RunCli("train").exit_code, 2);  // --out missing
  EXPECT_EQ(RunCli("train --out " + dir + "/r --override model.k=lots").exit_code, 2);
  EXPECT_EQ(RunCli("train --out " + dir + "/r --override nokey").exit_code, 2);
  EXPECT_EQ(RunCli("--help").exit_code, 0);
  // A corrupt checkpoint is a runtime failure, not a usage error.
  WriteText(dir + "/bad.bin", "not a checkpoint");
  EXPECT_EQ(RunCli("eval --quiet --checkpoint " + dir + "/bad.bin").exit_code, 1);
  WriteText(dir + "/log.tsv", "garbage\n");
  EXPECT_EQ(RunCli("analyze --log " + dir + "/log.tsv").exit_code, 1);
}

TEST(Cli, TrainEvalAnalyze) {
  const std::string dir = TempDir("cli_run");
  WriteText(dir + "/tiny.cfg", kTinyConfig);
  const std::string common = " --quiet --config " + dir + "/tiny.cfg";
  ASSERT_EQ(RunCli("train --out " + dir + "/run" + common).exit_code, 0);
  Outcome ev = RunCli("eval --checkpoint " + dir + "/run/checkpoint.bin" + common);
  ASSERT_EQ(ev.exit_code, 0);
  EXPECT_NE(ev.out.find("eer_percent\t"), std::string::npos);
  EXPECT_NE(ev.out.find("min_dcf_p0.05\t"), std::string::npos);
  Outcome an = RunCli("analyze --log " + dir + "/run/train_log.tsv --out " + dir + "/an");
  ASSERT_EQ(an.exit_code, 0);
  EXPECT_NE(an.out.find("collapse\t"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir + "/an/series.tsv"));
}

TEST(Cli, AblateThreeAugmentationSets) {
  const std::string dir = TempDir("cli_ablate");
  WriteText(dir + "/tiny.cfg", kTinyConfig);
  WriteText(dir + "/sweep.txt",
            "[none]\naug.p_noise_reverb=0\n"
            "[noise_reverb]\naug.p_noise_reverb=1\n"
            "[pitch_noise_reverb]\naug.p_pitch=0.5\naug.p_noise_reverb=1\n");
  Outcome o = RunCli("ablate --quiet --config " + dir + "/tiny.cfg --sweep " + dir +
                     "/sweep.txt --out " + dir + "/out");
  ASSERT_EQ(o.exit_code, 0);
  int run_dirs = 0;
  for (const auto& e : fs::directory_iterator(dir + "/out"))
    if (e.is_directory()) ++run_dirs;
  EXPECT_EQ(run_dirs, 3);
  std::string table = Slurp(dir + "/out/comparison.tsv");
  int lines = 0;
  for (char c : table) lines += c == '\n';
  EXPECT_EQ(lines, 4);  // header + 3 runs
  EXPECT_NE(table.find("\npitch_noise_reverb\t"), std::string::npos);
}

}  // namespace
