// trainer.cc

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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "fbank.h"
#include "text.h"

namespace spkdino {

namespace {

constexpr char kLogName[] = "train_log.tsv";
constexpr char kFinetuneLogName[] = "finetune_log.tsv";

std::string JoinPath(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::vector<Waveform> LoadBank(const std::string& manifest_path) {
  Manifest m = ReadManifest(manifest_path);
  std::vector<Waveform> bank;
  for (const auto& e : m.entries()) bank.push_back(Resolve(m, e));
  if (bank.empty()) Fail(ErrorCode::kInvalidArgument, "bank manifest ", manifest_path, " is empty");
  return bank;
}

std::vector<size_t> EpochOrder(size_t n, uint64_t seed, const char* tag, int64_t epoch) {
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(DeriveSeed(seed, tag, static_cast<uint64_t>(epoch)));
  Shuffle(order.begin(), order.end(), rng);
  return order;
}

// Index of the first key on which two serialized configs differ.
std::string FirstDifference(const std::string& a, const std::string& b) {
  auto la = Split(a, '\n'), lb = Split(b, '\n');
  for (size_t i = 0; i < std::max(la.size(), lb.size()); ++i) {
    std::string x = i < la.size() ? la[i] : "", y = i < lb.size() ? lb[i] : "";
    if (x != y) return x.empty() ? y : x;
  }
  return "";
}

// Training log lines of an interrupted run that precede `step`.
std::string LogPrefix(const std::string& path, int64_t step) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot reopen training log ", path, " for resuming");
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#' || line.rfind("step\t", 0) == 0) {
      kept += line + "\n";
      continue;
    }
    auto fields = Split(line, '\t');
    if (ParseInt(fields[0], "log step") < step) kept += line + "\n";
  }
  return kept;
}

int ArgMax(const Vector& v) {
  Eigen::Index i;
  v.maxCoeff(&i);
  return static_cast<int>(i);
}

ModelDims ModelDimsOf(const RunConfig& cfg) {
  ModelDims dims = cfg.model;
  dims.feat_dim = cfg.features.n_mels;
  return dims;
}

// Up to 64 evenly spaced utterances, each cut to its first long segment.
std::vector<Matrix> InitProbe(size_t count, const std::function<Waveform(size_t)>& get,
                              const RunConfig& cfg) {
  const size_t n = std::min<size_t>(64, count);
  std::vector<Matrix> probe;
  for (size_t j = 0; j < n; ++j) {
    Waveform w = get(j * count / n);
    const size_t len = static_cast<size_t>(std::lround(cfg.segments.long_seconds * w.sample_rate));
    if (w.samples.size() > len) w.samples.resize(len);
    probe.push_back(LogMel(w, cfg.features).frames);
  }
  return probe;
}

}  // namespace

Manifest LoadCorpus(const CorpusSpec& spec, double min_duration) {
  if (spec.manifest.empty())
    return SynthCorpus(spec.speakers, spec.utts_per_speaker, spec.duration, spec.seed,
                       spec.sample_rate, min_duration);
  Manifest m = ReadManifest(spec.manifest);
  if (m.size() == 0) Fail(ErrorCode::kInvalidArgument, "manifest ", spec.manifest, " is empty");
  return m;
}

AudioCache::AudioCache(const Manifest& manifest) {
  audio_.reserve(manifest.size());
  for (const auto& e : manifest.entries()) {
    Waveform w = Resolve(manifest, e);
    audio_.emplace_back(w.samples.begin(), w.samples.end());
    rates_.push_back(w.sample_rate);
  }
}

Waveform AudioCache::Get(size_t index) const {
  Waveform w;
  w.sample_rate = rates_.at(index);
  w.samples.assign(audio_[index].begin(), audio_[index].end());
  return w;
}

AugmentConfig BuildAugmentConfig(const RunConfig& cfg, int sample_rate) {
  const AugmentSpec& a = cfg.augment;
  AugmentConfig aug;
  aug.p_pitch = a.p_pitch;
  aug.pitch_cents_choices = a.pitch_cents;
  aug.p_tempo = a.p_tempo;
  aug.tempo_ratio_choices = a.tempo_ratios;
  aug.p_noise_reverb = a.p_noise_reverb;
  aug.snr_low_db = a.snr_low_db;
  aug.snr_high_db = a.snr_high_db;
  if (a.p_noise_reverb > 0.0) {
    const double noise_seconds = 2.0 * cfg.segments.long_seconds;
    aug.noise_bank = a.noise_manifest.empty()
                         ? MakeNoiseBank(a.bank_size, noise_seconds, sample_rate, a.bank_seed)
                         : LoadBank(a.noise_manifest);
    aug.ir_bank = a.ir_manifest.empty()
                      ? MakeIrBank(a.bank_size, sample_rate, DeriveSeed(a.bank_seed, "ir"))
                      : LoadBank(a.ir_manifest);
  }
  aug.Validate();
  return aug;
}

std::string FormatLogHeader(int k, int64_t warm_steps, int64_t total_steps) {
  std::ostringstream os;
  os << "# k=" << k << "\n# warm_steps=" << warm_steps << "\n# total_steps=" << total_steps
     << "\nstep\tloss\tteacher_entropy\tlambda\tlr\ttau_t\tmaxdim_freq\n";
  return os.str();
}

std::string FormatLogRow(const TrainLogRow& r) {
  return std::to_string(r.step) + "\t" + FormatDouble(r.loss) + "\t" +
         FormatDouble(r.teacher_entropy) + "\t" + FormatDouble(r.lambda) + "\t" +
         FormatDouble(r.lr) + "\t" + FormatDouble(r.tau_t) + "\t" + FormatDouble(r.maxdim_freq) +
         "\n";
}

TrainResult TrainDino(const RunConfig& cfg, const TrainOptions& opts) {
  cfg.Validate();
  const SegmentPlan& plan = cfg.segments;
  const int sample_rate = cfg.corpus.sample_rate;
  AugmentConfig aug = BuildAugmentConfig(cfg, sample_rate);
  const double min_duration = MinimumDuration(aug, plan);
  Manifest corpus = LoadCorpus(cfg.corpus, min_duration);
  AudioCache audio(corpus);
  for (size_t i = 0; i < audio.size(); ++i) {
    Waveform w = audio.Get(i);
    if (w.Duration() + 1e-9 < min_duration)
      Fail(ErrorCode::kInvalidArgument, "utterance ", corpus.entries()[i].utterance_id, " is ",
           w.Duration(), " s; the segment plan needs at least ", min_duration, " s");
  }

  const int64_t batch = cfg.batch_size;
  const int64_t steps_per_epoch = static_cast<int64_t>(audio.size()) / batch;
  if (steps_per_epoch == 0)
    Fail(ErrorCode::kInvalidArgument, "corpus of ", audio.size(),
         " utterances is smaller than the batch size ", batch);
  const int64_t total = steps_per_epoch * cfg.epochs;
  const ModelDims dims = ModelDimsOf(cfg);
  const std::string config_text = SerializeConfig(cfg);

  TrainResult res;
  res.total_steps = total;
  res.student = InitModel(dims, DeriveSeed(cfg.seed, "init"), true);
  if (cfg.data_init && opts.resume_checkpoint.empty())
    DataDependentInit(&res.student,
                      InitProbe(audio.size(), [&](size_t i) { return audio.Get(i); }, cfg));
  res.teacher = res.student;
  ModelParams velocity = res.student.ZerosLike();
  DinoState state = DinoState::Create(cfg.dino, dims.k, total);

  if (!opts.resume_checkpoint.empty()) {
    Checkpoint ckpt = LoadCheckpoint(opts.resume_checkpoint);
    if (ckpt.config_text != config_text)
      Fail(ErrorCode::kInvalidArgument, "checkpoint ", opts.resume_checkpoint,
           " was written with a different config (", FirstDifference(ckpt.config_text, config_text),
           ")");
    if (!ckpt.teacher || !ckpt.velocity || !ckpt.center)
      Fail(ErrorCode::kFormat, "checkpoint ", opts.resume_checkpoint,
           " lacks the teacher, momentum or center needed to resume");
    res.student = std::move(ckpt.student);
    res.teacher = std::move(*ckpt.teacher);
    velocity = std::move(*ckpt.velocity);
    state.center = *ckpt.center;
    state.step = ckpt.step;
    if (state.step > total) Fail(ErrorCode::kFormat, "checkpoint step beyond schedule end");
  }

  std::ofstream log;
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    std::string log_path = JoinPath(opts.out_dir, kLogName);
    std::string prefix = state.step > 0 && std::filesystem::exists(log_path)
                             ? LogPrefix(log_path, state.step)
                             : FormatLogHeader(dims.k, WarmSteps(cfg.dino.tau_t_warm_fraction, total), total);
    std::ofstream config_out(JoinPath(opts.out_dir, "config.txt"), std::ios::binary);
    config_out << config_text;
    log.open(log_path, std::ios::binary | std::ios::trunc);
    if (!log || !config_out) Fail(ErrorCode::kIo, "cannot write into ", opts.out_dir);
    log << prefix;
  }

  auto save = [&](const std::string& name) {
    if (opts.out_dir.empty()) return std::string();
    Checkpoint c;
    c.step = state.step;
    c.config_text = config_text;
    c.student = res.student;
    c.teacher = res.teacher;
    c.velocity = velocity;
    c.center = state.center;
    std::string path = JoinPath(opts.out_dir, name);
    SaveCheckpoint(c, path);
    return path;
  };

  const int n_long = plan.n_long;
  int64_t order_epoch = -1;
  std::vector<size_t> order;
  double epoch_loss = 0.0;
  while (state.step < total) {
    if (opts.stop_after_step >= 0 && state.step >= opts.stop_after_step) break;
    const int64_t step = state.step;
    const int64_t epoch = step / steps_per_epoch;
    const int64_t pos = step % steps_per_epoch;
    if (epoch != order_epoch) {
      order = EpochOrder(audio.size(), cfg.seed, "shuffle", epoch);
      order_epoch = epoch;
    }
    const double tau_t = state.TeacherTemperature();
    const double lambda = state.Lambda();
    const double lr = CosineSchedule(cfg.lr_start, cfg.lr_end, step, total);

    // Teacher pass over the long views of the whole batch; the center is a
    // batch statistic, so the student pass waits until it is known.
    std::vector<std::vector<Matrix>> feats(static_cast<size_t>(batch));
    std::vector<Vector> teacher_raw;
    for (int64_t b = 0; b < batch; ++b) {
      Waveform w = audio.Get(order[static_cast<size_t>(pos * batch + b)]);
      auto views = BuildViews(w, aug, plan,
                              DeriveSeed(cfg.seed, "views", static_cast<uint64_t>(step),
                                         static_cast<uint64_t>(b)));
      for (const auto& v : views) feats[b].push_back(LogMel(v.audio, cfg.features).frames);
      for (int i = 0; i < n_long; ++i)
        teacher_raw.push_back(Project(res.teacher, Encode(res.teacher, feats[b][i])));
    }
    std::vector<Vector> centered = CenterAndUpdate(&state, teacher_raw);

    Gradients grads = res.student.ZerosLike();
    TrainLogRow row;
    row.step = step;
    row.lambda = lambda;
    row.lr = lr;
    row.tau_t = tau_t;
    std::map<int, int> argmax_counts;
    for (int64_t b = 0; b < batch; ++b) {
      ViewOutputs outs;
      std::vector<ForwardPass> passes;
      for (int i = 0; i < n_long; ++i) outs.teacher_q.push_back(centered[b * n_long + i]);
      for (const auto& f : feats[b]) {
        passes.push_back(Forward(res.student, f));
        outs.student_q.push_back(passes.back().q);
      }
      DinoLossResult r = DinoLoss(outs, tau_t, cfg.dino.tau_s);
      row.loss += r.loss / static_cast<double>(batch);
      for (const auto& p : r.teacher_probs) {
        row.teacher_entropy += Entropy(p);
        ++argmax_counts[ArgMax(p)];
      }
      if (!std::isfinite(r.loss)) break;
      for (size_t j = 0; j < passes.size(); ++j)
        Backward(res.student, passes[j], r.d_student_q[j] / static_cast<double>(batch), &grads);
    }
    const double n_teacher = static_cast<double>(batch * n_long);
    row.teacher_entropy /= n_teacher;
    int mode = 0;
    for (const auto& [k, c] : argmax_counts) mode = std::max(mode, c);
    row.maxdim_freq = mode / n_teacher;

    if (!std::isfinite(row.loss)) {
      if (log.is_open()) log.flush();
      Fail(ErrorCode::kNumeric, "training diverged: non-finite loss at step ", step, " (epoch ",
           epoch, ", lambda ", lambda, ", lr ", lr, ", tau_t ", tau_t, ", teacher entropy ",
           row.teacher_entropy, ")");
    }
    AddWeightDecay(res.student, cfg.weight_decay, &grads);
    SgdStep(&res.student, grads, lr, &velocity, cfg.momentum);
    EmaUpdate(res.student, &res.teacher, lambda);
    ++state.step;

    res.log.push_back(row);
    if (log.is_open()) {
      log << FormatLogRow(row);
      log.flush();
    }
    epoch_loss += row.loss;
    if (pos + 1 == steps_per_epoch) {
      if (opts.verbose)
        std::fprintf(stderr, "epoch %lld/%d  loss %.4f  H(p_t) %.3f  maxdim %.2f\n",
                     static_cast<long long>(epoch + 1), cfg.epochs,
                     epoch_loss / static_cast<double>(steps_per_epoch), row.teacher_entropy,
                     row.maxdim_freq);
      epoch_loss = 0.0;
      if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0) {
        char name[64];
        std::snprintf(name, sizeof(name), "checkpoint_epoch%03lld.bin",
                      static_cast<long long>(epoch + 1));
        save(name);
      }
    }
  }

  res.steps_done = state.step;
  res.center = state.center;
  if (state.step == total) {
    res.checkpoint_path = save("checkpoint.bin");
  } else {
    char name[64];
    std::snprintf(name, sizeof(name), "checkpoint_step%06lld.bin",
                  static_cast<long long>(state.step));
    res.checkpoint_path = save(name);
  }
  return res;
}

std::vector<size_t> LabelledSubset(const Manifest& manifest, double fraction, uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    Fail(ErrorCode::kInvalidArgument, "label fraction must be in (0, 1]");
  std::map<std::string, std::vector<size_t>> by_speaker;
  for (size_t i = 0; i < manifest.size(); ++i)
    by_speaker[manifest.entries()[i].speaker_id].push_back(i);
  std::vector<size_t> keep;
  uint64_t s = 0;
  for (const auto& spk : manifest.SpeakerIds()) {
    std::vector<size_t> utts = by_speaker[spk];
    Rng rng(DeriveSeed(seed, "labels", s++));
    Shuffle(utts.begin(), utts.end(), rng);
    size_t n = static_cast<size_t>(std::ceil(fraction * static_cast<double>(utts.size()) - 1e-9));
    n = std::max<size_t>(1, std::min(n, utts.size()));
    keep.insert(keep.end(), utts.begin(), utts.begin() + static_cast<long>(n));
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

FinetuneResult FinetuneAam(const RunConfig& cfg, const TrainOptions& opts) {
  cfg.Validate();
  const int sample_rate = cfg.corpus.sample_rate;
  RunConfig ar = cfg;
  ar.augment.p_pitch = 0.0;
  ar.augment.p_tempo = 0.0;
  AugmentConfig aug = BuildAugmentConfig(ar, sample_rate);
  SegmentPlan plan{1, cfg.segments.long_seconds, 0, cfg.segments.long_seconds};

  Manifest corpus = LoadCorpus(cfg.corpus, plan.long_seconds);
  std::vector<size_t> labelled = LabelledSubset(corpus, cfg.label_fraction, cfg.seed);
  std::map<std::string, int> class_of;
  for (size_t i : labelled) class_of.emplace(corpus.entries()[i].speaker_id, 0);
  int n_classes = 0;
  for (auto& [spk, c] : class_of) c = n_classes++;
  if (n_classes < 2) Fail(ErrorCode::kInvalidArgument, "fine-tuning needs at least 2 speakers");
  if (cfg.aam.n_classes != 0 && cfg.aam.n_classes != n_classes)
    Fail(ErrorCode::kInvalidArgument, "labelled data has ", n_classes,
         " speakers but aam.n_classes is ", cfg.aam.n_classes);

  std::vector<Waveform> audio;
  std::vector<int> labels;
  FinetuneResult res;
  for (size_t i : labelled) {
    const auto& e = corpus.entries()[i];
    audio.push_back(Resolve(corpus, e));
    if (audio.back().Duration() + 1e-9 < plan.long_seconds)
      Fail(ErrorCode::kInvalidArgument, "utterance ", e.utterance_id, " is shorter than ",
           plan.long_seconds, " s");
    labels.push_back(class_of[e.speaker_id]);
    res.labelled.push_back(e.utterance_id);
  }

  const ModelDims dims = ModelDimsOf(cfg);
  ModelParams model;
  if (!cfg.finetune_init.empty()) {
    model = LoadCheckpoint(cfg.finetune_init).student;
    model.hidden.clear();
    model.bottleneck = Linear();
    model.prototypes.resize(0, 0);
    model.aam.resize(0, 0);
    ModelDims got = DimsOf(model);
    if (got.feat_dim != dims.feat_dim)
      Fail(ErrorCode::kInvalidArgument, "checkpoint expects ", got.feat_dim,
           "-dim features, config gives ", dims.feat_dim);
  } else {
    model = InitModel(dims, DeriveSeed(cfg.seed, "init"), false);
    if (cfg.data_init)
      DataDependentInit(&model, InitProbe(audio.size(), [&](size_t i) { return audio[i]; }, cfg));
  }

  // Classifier rows start at the normalised class means of the initial
  // embeddings, which keeps the trajectory independent of label numbering.
  Matrix means = Matrix::Zero(n_classes, model.embed.weight.rows());
  for (size_t i = 0; i < audio.size(); ++i) {
    Vector e = Encode(model, LogMel(audio[i], cfg.features).frames);
    means.row(labels[i]) += e.transpose() / std::max(e.norm(), kNormEpsilon);
  }
  model.aam = NormalizeRows(means);

  AamConfig aam = cfg.aam;
  aam.n_classes = n_classes;
  const int64_t batch = std::min<int64_t>(cfg.batch_size, static_cast<int64_t>(audio.size()));
  const int64_t steps_per_epoch = std::max<int64_t>(1, static_cast<int64_t>(audio.size()) / batch);
  const int64_t total = steps_per_epoch * cfg.epochs;
  ModelParams velocity = model.ZerosLike();

  std::ofstream log;
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    log.open(JoinPath(opts.out_dir, kFinetuneLogName), std::ios::binary | std::ios::trunc);
    std::ofstream config_out(JoinPath(opts.out_dir, "config.txt"), std::ios::binary);
    config_out << SerializeConfig(cfg);
    if (!log || !config_out) Fail(ErrorCode::kIo, "cannot write into ", opts.out_dir);
    log << "step\tloss\tlr\n";
  }

  std::vector<size_t> order;
  for (int64_t step = 0; step < total; ++step) {
    const int64_t epoch = step / steps_per_epoch, pos = step % steps_per_epoch;
    if (pos == 0) order = EpochOrder(audio.size(), cfg.seed, "finetune-shuffle", epoch);
    const double lr = CosineSchedule(cfg.lr_start, cfg.lr_end, step, total);
    Gradients grads = model.ZerosLike();
    double loss = 0.0;
    for (int64_t b = 0; b < batch; ++b) {
      size_t idx = order[static_cast<size_t>(pos * batch + b)];
      auto views = BuildViews(audio[idx], aug, plan,
                              DeriveSeed(cfg.seed, "finetune-views", static_cast<uint64_t>(step),
                                         static_cast<uint64_t>(b)));
      EncoderCache cache;
      Vector e = Encode(model, LogMel(views[0].audio, cfg.features).frames, &cache);
      AamResult r = AamLoss(e, labels[idx], model.aam, aam);
      loss += r.loss / static_cast<double>(batch);
      BackwardEncoder(model, cache, r.d_embedding / static_cast<double>(batch), &grads);
      grads.aam += r.d_prototypes / static_cast<double>(batch);
    }
    if (!std::isfinite(loss))
      Fail(ErrorCode::kNumeric, "fine-tuning diverged: non-finite loss at step ", step);
    AddWeightDecay(model, cfg.weight_decay, &grads);
    SgdStep(&model, grads, lr, &velocity, cfg.momentum);
    res.losses.push_back(loss);
    if (log.is_open()) log << step << "\t" << FormatDouble(loss) << "\t" << FormatDouble(lr) << "\n";
    if (opts.verbose && pos + 1 == steps_per_epoch)
      std::fprintf(stderr, "finetune epoch %lld/%d  loss %.4f\n",
                   static_cast<long long>(epoch + 1), cfg.epochs, loss);
  }

  res.model = std::move(model);
  if (!opts.out_dir.empty()) {
    Checkpoint c;
    c.step = total;
    c.config_text = SerializeConfig(cfg);
    c.student = res.model;
    res.checkpoint_path = JoinPath(opts.out_dir, "checkpoint.bin");
    SaveCheckpoint(c, res.checkpoint_path);
  }
  return res;
}

}  // namespace spkdino
