// augment.cc

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

#include "augment.h"

#include <algorithm>
#include <cmath>

#include "common.h"
#include "corpus.h"
#include "dsp.h"

namespace spkdino {

namespace {

void CheckProbability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0))
    Fail(ErrorCode::kInvalidArgument, name, " must be in [0, 1], got ", p);
}

void FitLength(std::vector<double>* x, size_t n) { x->resize(n, 0.0); }

// Picks a random window of `length` samples, looping short sources.
std::vector<double> RandomWindow(const Waveform& src, size_t length, Rng& rng) {
  std::vector<double> out(length);
  size_t n = src.size();
  size_t start = n > length ? UniformIndex(rng, n - length + 1) : 0;
  for (size_t i = 0; i < length; ++i) out[i] = src.samples[(start + i) % n];
  return out;
}

}  // namespace

void AugmentConfig::Validate() const {
  CheckProbability(p_pitch, "p_pitch");
  CheckProbability(p_tempo, "p_tempo");
  CheckProbability(p_noise_reverb, "p_noise_reverb");
  if (!(snr_low_db <= snr_high_db))
    Fail(ErrorCode::kInvalidArgument, "snr range low (", snr_low_db, ") exceeds high (",
         snr_high_db, ")");
  if (p_pitch > 0.0 && pitch_cents_choices.empty())
    Fail(ErrorCode::kInvalidArgument, "p_pitch > 0 needs pitch cent choices");
  if (p_tempo > 0.0 && tempo_ratio_choices.empty())
    Fail(ErrorCode::kInvalidArgument, "p_tempo > 0 needs tempo ratio choices");
  if (p_noise_reverb > 0.0 && (noise_bank.empty() || ir_bank.empty()))
    Fail(ErrorCode::kInvalidArgument, "p_noise_reverb > 0 needs a noise bank and an IR bank");
  for (double c : pitch_cents_choices)
    if (!(std::abs(c) <= 1200.0))
      Fail(ErrorCode::kInvalidArgument, "pitch shift ", c, " cents outside [-1200, 1200]");
  for (double r : tempo_ratio_choices)
    if (!(r >= 0.5 && r <= 2.0))
      Fail(ErrorCode::kInvalidArgument, "tempo ratio ", r, " outside [0.5, 2]");
}

void SegmentPlan::Validate() const {
  if (n_long < 1) Fail(ErrorCode::kInvalidArgument, "segment plan needs at least one long view");
  if (n_short < 0) Fail(ErrorCode::kInvalidArgument, "negative short view count");
  if (!(short_seconds > 0.0 && long_seconds >= short_seconds))
    Fail(ErrorCode::kInvalidArgument, "segment durations need long >= short > 0");
}

Waveform TempoStretch(const Waveform& w, double ratio) {
  if (!(ratio >= 0.5 && ratio <= 2.0))
    Fail(ErrorCode::kInvalidArgument, "tempo ratio ", ratio, " outside [0.5, 2]");
  if (ratio == 1.0 || w.samples.empty()) return w;
  const double sr = w.sample_rate;
  const size_t n = w.size();
  const size_t out_len = static_cast<size_t>(std::llround(static_cast<double>(n) / ratio));
  const long frame = std::lround(0.030 * sr);
  const long hop = std::lround(0.010 * sr);
  const long radius = std::lround(0.0075 * sr);
  const long overlap = frame - hop;
  const std::vector<double> window = HannWindow(static_cast<size_t>(frame));

  // Zero padding on both sides so that every candidate window is in range.
  const long pad = 2 * frame + radius;
  std::vector<double> xp(n + 2 * static_cast<size_t>(pad) + 4 * static_cast<size_t>(frame), 0.0);
  std::copy(w.samples.begin(), w.samples.end(), xp.begin() + pad);
  const long max_start = static_cast<long>(xp.size()) - frame;

  std::vector<double> acc(out_len, 0.0), wsum(out_len, 0.0);
  long prev = 0;
  for (long k = 0;; ++k) {
    long out_start = k * hop - frame;
    if (out_start >= static_cast<long>(out_len)) break;
    long nominal = pad + std::lround(static_cast<double>(out_start) * ratio);
    long src = std::clamp(nominal, 0L, max_start);
    if (k > 0) {
      // Best match to the natural continuation of the previous frame.
      long natural = std::min(prev + hop, max_start);
      double best = -std::numeric_limits<double>::infinity();
      for (long d = -radius; d <= radius; ++d) {
        long cand = nominal + d;
        if (cand < 0 || cand > max_start) continue;
        double score = 0.0;
        const double* a = xp.data() + cand;
        const double* b = xp.data() + natural;
        for (long i = 0; i < overlap; ++i) score += a[i] * b[i];
        if (score > best) {
          best = score;
          src = cand;
        }
      }
    }
    for (long i = 0; i < frame; ++i) {
      long o = out_start + i;
      if (o < 0 || o >= static_cast<long>(out_len)) continue;
      acc[o] += window[i] * xp[src + i];
      wsum[o] += window[i];
    }
    prev = src;
  }
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(out_len);
  for (size_t i = 0; i < out_len; ++i)
    out.samples[i] = wsum[i] > 1e-9 ? acc[i] / wsum[i] : 0.0;
  return out;
}

Waveform PitchShift(const Waveform& w, double cents) {
  if (!(std::abs(cents) <= 1200.0))
    Fail(ErrorCode::kInvalidArgument, "pitch shift ", cents, " cents outside [-1200, 1200]");
  if (cents == 0.0 || w.samples.empty()) return w;
  const double factor = std::exp2(cents / 1200.0);
  Waveform resampled;
  resampled.sample_rate = w.sample_rate;
  resampled.samples = LinearResample(w.samples, factor);
  Waveform out = TempoStretch(resampled, 1.0 / factor);
  FitLength(&out.samples, w.size());
  return out;
}

NoiseMix AddNoise(const Waveform& w, const Waveform& noise, double snr_db) {
  if (!std::isfinite(snr_db)) Fail(ErrorCode::kInvalidArgument, "SNR must be finite");
  if (noise.size() < w.size())
    Fail(ErrorCode::kInvalidArgument, "noise (", noise.size(),
         " samples) shorter than signal (", w.size(), ")");
  double noise_power = 0.0;
  for (size_t i = 0; i < w.size(); ++i) noise_power += noise.samples[i] * noise.samples[i];
  noise_power /= static_cast<double>(std::max<size_t>(w.size(), 1));
  if (!(noise_power > 0.0))
    Fail(ErrorCode::kInvalidArgument, "noise segment has zero power");

  NoiseMix mix;
  double signal_power = MeanPower(w);
  if (signal_power > 0.0) {
    mix.noise_gain = std::sqrt(signal_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
  } else {
    mix.silent_signal = true;
    mix.noise_gain = 0.1 / std::sqrt(noise_power);  // -20 dBFS RMS
  }
  mix.audio.sample_rate = w.sample_rate;
  mix.audio.samples.resize(w.size());
  for (size_t i = 0; i < w.size(); ++i)
    mix.audio.samples[i] = w.samples[i] + mix.noise_gain * noise.samples[i];
  mix.output_gain = RescaleIfOverflow(&mix.audio);
  return mix;
}

Waveform Reverberate(const Waveform& w, const Waveform& ir) {
  if (ir.samples.empty()) Fail(ErrorCode::kInvalidArgument, "empty impulse response");
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples = FftConvolve(w.samples, ir.samples);
  FitLength(&out.samples, w.size());
  double in_peak = Peak(w), out_peak = Peak(out);
  if (out_peak > 0.0) {
    double gain = in_peak / out_peak;
    for (double& s : out.samples) s *= gain;
  }
  return out;
}

double MinimumDuration(const AugmentConfig& cfg, const SegmentPlan& plan) {
  double stretch = 1.0;
  if (cfg.p_tempo > 0.0)
    for (double r : cfg.tempo_ratio_choices) stretch = std::max(stretch, r);
  return plan.long_seconds * stretch;
}

std::vector<View> BuildViews(const Waveform& w, const AugmentConfig& cfg,
                             const SegmentPlan& plan, uint64_t seed) {
  cfg.Validate();
  plan.Validate();
  const double min_seconds = MinimumDuration(cfg, plan);
  const size_t min_samples =
      static_cast<size_t>(std::ceil(min_seconds * w.sample_rate - 1e-9));
  if (w.size() < min_samples)
    Fail(ErrorCode::kInvalidArgument, "utterance of ", w.Duration(),
         " s is too short: segment plan needs at least ", min_seconds, " s");

  Rng rng(seed);
  const Waveform* source = &w;
  Waveform shifted;
  if (Uniform01(rng) < cfg.p_pitch) {
    double cents = cfg.pitch_cents_choices[UniformIndex(rng, cfg.pitch_cents_choices.size())];
    shifted = PitchShift(w, cents);
    source = &shifted;
  }

  auto make_segment = [&](double seconds) {
    const size_t target = static_cast<size_t>(std::llround(seconds * w.sample_rate));
    double q_tempo = Uniform01(rng);
    double q_noise = Uniform01(rng);
    double ratio = 1.0;
    if (q_tempo < cfg.p_tempo)
      ratio = cfg.tempo_ratio_choices[UniformIndex(rng, cfg.tempo_ratio_choices.size())];
    size_t crop = std::min(source->size(),
                           static_cast<size_t>(std::llround(static_cast<double>(target) * ratio)));
    size_t start = UniformIndex(rng, source->size() - crop + 1);
    Waveform seg;
    seg.sample_rate = w.sample_rate;
    seg.samples.assign(source->samples.begin() + static_cast<long>(start),
                       source->samples.begin() + static_cast<long>(start + crop));
    if (ratio != 1.0) seg = TempoStretch(seg, ratio);
    FitLength(&seg.samples, target);
    if (q_noise < cfg.p_noise_reverb) {
      if (UniformIndex(rng, 2) == 0) {
        const Waveform& bank = cfg.noise_bank[UniformIndex(rng, cfg.noise_bank.size())];
        Waveform noise;
        noise.sample_rate = bank.sample_rate;
        noise.samples = RandomWindow(bank, target, rng);
        double snr = UniformIn(rng, cfg.snr_low_db, cfg.snr_high_db);
        seg = AddNoise(seg, noise, snr).audio;
      } else {
        seg = Reverberate(seg, cfg.ir_bank[UniformIndex(rng, cfg.ir_bank.size())]);
      }
    }
    return seg;
  };

  // Short crops are drawn first, then long ones; the result lists long first.
  std::vector<Waveform> shorts, longs;
  for (int i = 0; i < plan.n_short; ++i) shorts.push_back(make_segment(plan.short_seconds));
  for (int i = 0; i < plan.n_long; ++i) longs.push_back(make_segment(plan.long_seconds));
  std::vector<View> views;
  views.reserve(plan.total());
  for (auto& s : longs) views.push_back({ViewKind::kLong, std::move(s)});
  for (auto& s : shorts) views.push_back({ViewKind::kShort, std::move(s)});
  return views;
}

std::vector<Waveform> MakeNoiseBank(int count, double seconds, int sample_rate, uint64_t seed) {
  std::vector<Waveform> bank;
  const size_t n = static_cast<size_t>(std::llround(seconds * sample_rate));
  for (int b = 0; b < count; ++b) {
    Rng rng(DeriveSeed(seed, "noise", b));
    Waveform w;
    w.sample_rate = sample_rate;
    w.samples.assign(n, 0.0);
    switch (b % 4) {
      case 0:  // white
        for (auto& s : w.samples) s = Gaussian(rng);
        break;
      case 1: {  // low-passed (pink-to-brown)
        double a = UniformIn(rng, 0.6, 0.97), y = 0.0;
        for (auto& s : w.samples) s = y = a * y + Gaussian(rng);
        break;
      }
      case 2: {  // high-passed
        double prev = 0.0;
        for (auto& s : w.samples) {
          double x = Gaussian(rng);
          s = x - prev;
          prev = x;
        }
        break;
      }
      default: {  // babble of several unrelated voices
        int voices = 4 + static_cast<int>(UniformIndex(rng, 3));
        for (int v = 0; v < voices; ++v) {
          SynthParams p;
          p.speaker = RandomSpeaker(DeriveSeed(seed, "babble", b, v), "babble");
          p.duration = seconds;
          p.sample_rate = sample_rate;
          Waveform voice = Synthesize(p, DeriveSeed(seed, "babble-utt", b, v));
          for (size_t i = 0; i < n && i < voice.size(); ++i) w.samples[i] += voice.samples[i];
        }
        break;
      }
    }
    double rms = std::sqrt(MeanPower(w));
    if (rms > 0.0)
      for (auto& s : w.samples) s *= 0.1 / rms;
    bank.push_back(std::move(w));
  }
  return bank;
}

std::vector<Waveform> MakeIrBank(int count, int sample_rate, uint64_t seed) {
  std::vector<Waveform> bank;
  for (int b = 0; b < count; ++b) {
    Rng rng(DeriveSeed(seed, "ir", b));
    double rt60 = UniformIn(rng, 0.2, 0.8);
    size_t len = static_cast<size_t>(std::llround(rt60 * sample_rate));
    size_t predelay = static_cast<size_t>(UniformIn(rng, 0.001, 0.005) * sample_rate);
    double tail_energy = UniformIn(rng, 0.5, 3.0);  // relative to the direct path
    Waveform ir;
    ir.sample_rate = sample_rate;
    ir.samples.assign(len, 0.0);
    ir.samples[0] = 1.0;
    double decay = std::log(1000.0) / (rt60 * sample_rate);  // -60 dB at rt60
    const size_t tail_start = std::max<size_t>(predelay, 1);
    double energy = 0.0;
    for (size_t i = tail_start; i < len; ++i) {
      ir.samples[i] = Gaussian(rng) * std::exp(-decay * static_cast<double>(i));
      energy += ir.samples[i] * ir.samples[i];
    }
    double g = energy > 0.0 ? std::sqrt(tail_energy / energy) : 0.0;
    for (size_t i = tail_start; i < len; ++i) ir.samples[i] *= g;
    bank.push_back(std::move(ir));
  }
  return bank;
}

}  // namespace spkdino
