// experiments.cc

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

#include "experiments.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "eval.h"
#include "text.h"

namespace spkdino {

namespace {

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open ", path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) Fail(ErrorCode::kIo, "cannot write ", path);
}

bool ValidRunName(const std::string& name) {
  if (name.empty() || name == "." || name == "..") return false;
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '_' ||
          c == '.'))
      return false;
  return true;
}

std::string Optional(double v) { return v < 0.0 ? "NA" : FormatDouble(v); }

}  // namespace

TrainLog ParseTrainLog(const std::string& text) {
  TrainLog log;
  std::istringstream in(text);
  std::string line;
  bool have_columns = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = Trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      s.remove_prefix(1);
      s = Trim(s);
      size_t eq = s.find('=');
      if (eq == std::string_view::npos) continue;
      std::string_view key = Trim(s.substr(0, eq)), value = s.substr(eq + 1);
      if (key == "k") log.k = static_cast<int>(ParseInt(value, "k"));
      else if (key == "warm_steps") log.warm_steps = ParseInt(value, "warm_steps");
      else if (key == "total_steps") log.total_steps = ParseInt(value, "total_steps");
      continue;
    }
    auto f = Split(s, '\t');
    if (!have_columns) {
      if (f.size() < 6 || f[0] != "step")
        Fail(ErrorCode::kFormat, "training log line ", lineno, ": expected the column header");
      have_columns = true;
      continue;
    }
    if (f.size() < 6) Fail(ErrorCode::kFormat, "training log line ", lineno, " has ", f.size(), " fields");
    TrainLogRow r;
    r.step = ParseInt(f[0], "step");
    r.loss = ParseDouble(f[1], "loss");
    r.teacher_entropy = ParseDouble(f[2], "entropy");
    r.lambda = ParseDouble(f[3], "lambda");
    r.lr = ParseDouble(f[4], "lr");
    r.tau_t = ParseDouble(f[5], "tau_t");
    r.maxdim_freq = f.size() > 6 ? ParseDouble(f[6], "maxdim_freq") : 0.0;
    log.rows.push_back(r);
  }
  if (log.k < 2) Fail(ErrorCode::kFormat, "training log lacks the '# k=' header");
  if (log.rows.empty()) Fail(ErrorCode::kFormat, "training log has no rows");
  return log;
}

TrainLog ReadTrainLog(const std::string& path) { return ParseTrainLog(ReadFile(path)); }

LogSummary SummarizeLog(const TrainLog& log) {
  if (log.rows.empty()) Fail(ErrorCode::kInvalidArgument, "empty training log");
  LogSummary s;
  s.k = log.k;
  s.rows = log.rows.size();
  s.warm_steps = log.warm_steps;
  s.total_steps = log.total_steps;
  const auto& first = log.rows.front();
  const auto& last = log.rows.back();
  s.first_loss = first.loss;
  s.final_loss = last.loss;
  s.first_lambda = first.lambda;
  s.last_lambda = last.lambda;
  s.first_lr = first.lr;
  s.last_lr = last.lr;
  s.first_tau_t = first.tau_t;
  s.last_tau_t = last.tau_t;

  std::vector<const TrainLogRow*> post;
  for (const auto& r : log.rows)
    if (r.step >= log.warm_steps) post.push_back(&r);
  if (post.empty())
    for (const auto& r : log.rows) post.push_back(&r);
  const double ln_k = std::log(static_cast<double>(log.k));
  s.min_entropy = s.max_entropy = post.front()->teacher_entropy;
  s.entropy_in_band = true;
  for (const auto* r : post) {
    s.min_entropy = std::min(s.min_entropy, r->teacher_entropy);
    s.max_entropy = std::max(s.max_entropy, r->teacher_entropy);
    if (!(r->teacher_entropy > kHealthyEntropyLow * ln_k &&
          r->teacher_entropy < kHealthyEntropyHigh * ln_k))
      s.entropy_in_band = false;
  }
  const size_t tail = std::max<size_t>(1, post.size() / 10);
  for (size_t i = post.size() - tail; i < post.size(); ++i) {
    s.tail_entropy += post[i]->teacher_entropy;
    s.tail_maxdim_freq += post[i]->maxdim_freq;
  }
  s.tail_entropy /= static_cast<double>(tail);
  s.tail_maxdim_freq /= static_cast<double>(tail);
  if (s.tail_maxdim_freq > kCollapseMaxdimFreq) {
    s.collapsed = true;
    s.collapse_kind = "dominant-dimension";
  } else if (s.tail_entropy > kCollapseEntropyFraction * ln_k) {
    s.collapsed = true;
    s.collapse_kind = "uniform";
  }
  return s;
}

std::string FormatSummary(const LogSummary& s) {
  std::ostringstream os;
  auto line = [&os](const std::string& k, const std::string& v) { os << k << '\t' << v << '\n'; };
  line("rows", std::to_string(s.rows));
  line("k", std::to_string(s.k));
  line("ln_k", FormatDouble(std::log(static_cast<double>(s.k))));
  line("warm_steps", std::to_string(s.warm_steps));
  line("total_steps", std::to_string(s.total_steps));
  line("loss_first", FormatDouble(s.first_loss));
  line("loss_final", FormatDouble(s.final_loss));
  line("lambda_first", FormatDouble(s.first_lambda));
  line("lambda_last", FormatDouble(s.last_lambda));
  line("lr_first", FormatDouble(s.first_lr));
  line("lr_last", FormatDouble(s.last_lr));
  line("tau_t_first", FormatDouble(s.first_tau_t));
  line("tau_t_last", FormatDouble(s.last_tau_t));
  line("post_warmup_entropy_min", FormatDouble(s.min_entropy));
  line("post_warmup_entropy_max", FormatDouble(s.max_entropy));
  line("tail_entropy", FormatDouble(s.tail_entropy));
  line("tail_maxdim_freq", FormatDouble(s.tail_maxdim_freq));
  line("entropy_in_band", s.entropy_in_band ? "yes" : "no");
  line("collapse", s.collapsed ? "yes" : "no");
  if (s.collapsed) line("collapse_kind", s.collapse_kind);
  return os.str();
}

std::string FormatSeries(const TrainLog& log) {
  const double ln_k = std::log(static_cast<double>(log.k));
  std::string out = "step\tloss\tentropy\tentropy_norm\tlambda\tlr\ttau_t\tmaxdim_freq\n";
  for (const auto& r : log.rows)
    out += std::to_string(r.step) + "\t" + FormatDouble(r.loss) + "\t" +
           FormatDouble(r.teacher_entropy) + "\t" + FormatDouble(r.teacher_entropy / ln_k) +
           "\t" + FormatDouble(r.lambda) + "\t" + FormatDouble(r.lr) + "\t" +
           FormatDouble(r.tau_t) + "\t" + FormatDouble(r.maxdim_freq) + "\n";
  return out;
}

LogSummary Analyze(const std::string& log_path, const std::string& out_dir) {
  TrainLog log = ReadTrainLog(log_path);
  LogSummary s = SummarizeLog(log);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    WriteFile((std::filesystem::path(out_dir) / "summary.txt").string(), FormatSummary(s));
    WriteFile((std::filesystem::path(out_dir) / "series.tsv").string(), FormatSeries(log));
  }
  return s;
}

std::vector<SweepRun> ParseSweep(const std::string& text) {
  std::vector<SweepRun> runs;
  std::set<std::string> names;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = Trim(line);
    if (s.empty() || s.front() == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') Fail(ErrorCode::kInvalidArgument, "sweep line ", lineno, ": unclosed [");
      std::string name(Trim(s.substr(1, s.size() - 2)));
      if (!ValidRunName(name))
        Fail(ErrorCode::kInvalidArgument, "sweep line ", lineno, ": bad run name '", name,
             "' (letters, digits, + - _ . only)");
      if (!names.insert(name).second)
        Fail(ErrorCode::kInvalidArgument, "sweep line ", lineno, ": duplicate run '", name, "'");
      runs.push_back({name, {}});
      continue;
    }
    if (runs.empty())
      Fail(ErrorCode::kInvalidArgument, "sweep line ", lineno, ": override before the first [name]");
    size_t eq = s.find('=');
    if (eq == std::string_view::npos)
      Fail(ErrorCode::kInvalidArgument, "sweep line ", lineno, ": expected key=value");
    std::string key(Trim(s.substr(0, eq))), value(Trim(s.substr(eq + 1)));
    RunConfig probe;
    SetConfigValue(&probe, key, value);  // rejects unknown keys and bad values early
    runs.back().overrides.emplace_back(key, value);
  }
  if (runs.empty()) Fail(ErrorCode::kInvalidArgument, "sweep defines no runs");
  return runs;
}

std::vector<SweepRun> ReadSweep(const std::string& path) { return ParseSweep(ReadFile(path)); }

std::string FormatComparison(const std::vector<AblationRow>& rows) {
  std::string out = "run\teer_percent\tmin_dcf\tasnorm_eer_percent\tnmi\tfinal_loss\ttail_entropy\tcollapse\n";
  for (const auto& r : rows)
    out += r.name + "\t" + FormatDouble(100.0 * r.eer) + "\t" + FormatDouble(r.min_dcf) + "\t" +
           (r.asnorm_eer < 0.0 ? "NA" : FormatDouble(100.0 * r.asnorm_eer)) + "\t" +
           Optional(r.nmi) + "\t" + FormatDouble(r.final_loss) + "\t" + Optional(r.tail_entropy) +
           "\t" + (r.collapsed ? "yes" : "no") + "\n";
  return out;
}

std::vector<AblationRow> Ablate(const RunConfig& base, const std::vector<SweepRun>& sweep,
                                const std::string& out_dir, bool verbose) {
  if (out_dir.empty()) Fail(ErrorCode::kInvalidArgument, "ablation needs an output directory");
  // Every run is checked before the first one starts.
  std::vector<RunConfig> configs;
  for (const auto& run : sweep) {
    RunConfig cfg = base;
    for (const auto& [k, v] : run.overrides) SetConfigValue(&cfg, k, v);
    try {
      cfg.Validate();
    } catch (const Error& e) {
      Fail(e.code(), "sweep run '", run.name, "': ", e.what());
    }
    configs.push_back(std::move(cfg));
  }
  std::filesystem::create_directories(out_dir);
  std::vector<AblationRow> rows;
  for (size_t i = 0; i < sweep.size(); ++i) {
    const SweepRun& run = sweep[i];
    const RunConfig& cfg = configs[i];
    const std::string dir = (std::filesystem::path(out_dir) / run.name).string();
    TrainOptions opts;
    opts.out_dir = dir;
    opts.verbose = verbose;
    AblationRow row;
    row.name = run.name;
    std::string ckpt;
    if (cfg.mode == RunMode::kDinoPretrain) {
      TrainResult tr = TrainDino(cfg, opts);
      ckpt = tr.checkpoint_path;
      LogSummary s = Analyze((std::filesystem::path(dir) / "train_log.tsv").string(),
                             (std::filesystem::path(dir) / "analysis").string());
      row.final_loss = s.final_loss;
      row.tail_entropy = s.tail_entropy;
      row.collapsed = s.collapsed;
    } else {
      FinetuneResult fr = FinetuneAam(cfg, opts);
      ckpt = fr.checkpoint_path;
      row.final_loss = fr.losses.empty() ? 0.0 : fr.losses.back();
    }
    EvalReport rep = Evaluate(cfg, ckpt, "", (std::filesystem::path(dir) / "eval").string());
    row.eer = rep.eer.eer;
    row.min_dcf = rep.min_dcf;
    if (rep.has_asnorm) row.asnorm_eer = rep.eer_asnorm.eer;
    if (rep.has_pseudo) row.nmi = rep.nmi;
    rows.push_back(row);
    WriteFile((std::filesystem::path(out_dir) / "comparison.tsv").string(), FormatComparison(rows));
  }
  return rows;
}

}  // namespace spkdino
