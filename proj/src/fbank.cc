// fbank.cc

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

#include "fbank.h"

#include <cmath>
#include <map>
#include <mutex>
#include <span>
#include <tuple>

#include "dsp.h"

namespace spkdino {

namespace {

double HzToMel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }

const Matrix& CachedFilterbank(int n_mels, size_t nfft, int sample_rate, double low_hz) {
  static std::mutex mu;
  static std::map<std::tuple<int, size_t, int, double>, Matrix> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(n_mels, nfft, sample_rate, low_hz);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, MelFilterbank(n_mels, nfft, sample_rate, low_hz)).first;
  return it->second;
}

}  // namespace

void FeatureConfig::Validate() const {
  if (n_mels < 1) Fail(ErrorCode::kInvalidArgument, "n_mels must be >= 1");
  if (!(win_seconds > 0.0 && hop_seconds > 0.0))
    Fail(ErrorCode::kInvalidArgument, "window and hop must be positive");
  if (!(low_hz >= 0.0)) Fail(ErrorCode::kInvalidArgument, "low_hz must be >= 0");
}

Matrix MelFilterbank(int n_mels, size_t nfft, int sample_rate, double low_hz) {
  const double high_hz = sample_rate / 2.0;
  if (!(low_hz < high_hz)) Fail(ErrorCode::kInvalidArgument, "mel low edge above Nyquist");
  const double mel_lo = HzToMel(low_hz), mel_hi = HzToMel(high_hz);
  const size_t n_bins = nfft / 2 + 1;
  Matrix fb = Matrix::Zero(n_mels, static_cast<long>(n_bins));
  for (int m = 0; m < n_mels; ++m) {
    double left = mel_lo + (mel_hi - mel_lo) * m / (n_mels + 1);
    double center = mel_lo + (mel_hi - mel_lo) * (m + 1) / (n_mels + 1);
    double right = mel_lo + (mel_hi - mel_lo) * (m + 2) / (n_mels + 1);
    for (size_t k = 0; k < n_bins; ++k) {
      double mel = HzToMel(static_cast<double>(k) * sample_rate / static_cast<double>(nfft));
      if (mel > left && mel < right)
        fb(m, static_cast<long>(k)) =
            mel <= center ? (mel - left) / (center - left) : (right - mel) / (right - center);
    }
  }
  return fb;
}

FeatureSequence LogMel(const Waveform& w, const FeatureConfig& cfg) {
  cfg.Validate();
  const size_t win = static_cast<size_t>(std::llround(cfg.win_seconds * w.sample_rate));
  const size_t hop = static_cast<size_t>(std::llround(cfg.hop_seconds * w.sample_rate));
  if (win == 0 || hop == 0) Fail(ErrorCode::kInvalidArgument, "window or hop below one sample");
  if (w.size() < win)
    Fail(ErrorCode::kInvalidArgument, "waveform of ", w.size(),
         " samples is shorter than one analysis window (", win, ")");
  const size_t n_frames = 1 + (w.size() - win) / hop;
  const size_t nfft = NextPow2(win);
  const Matrix& fb = CachedFilterbank(cfg.n_mels, nfft, w.sample_rate, cfg.low_hz);
  const std::vector<double> window = HannWindow(win);

  FeatureSequence feats;
  feats.frame_hop = cfg.hop_seconds;
  feats.frames.resize(static_cast<long>(n_frames), cfg.n_mels);
  std::vector<double> frame(win), power;
  for (size_t t = 0; t < n_frames; ++t) {
    for (size_t i = 0; i < win; ++i) frame[i] = w.samples[t * hop + i] * window[i];
    PowerSpectrum(frame, nfft, &power);
    Eigen::Map<const Vector> p(power.data(), static_cast<long>(power.size()));
    Vector mel = fb * p;
    for (int m = 0; m < cfg.n_mels; ++m)
      feats.frames(static_cast<long>(t), m) = std::log(std::max(mel(m), kLogFloor));
  }
  if (cfg.mean_norm) feats.frames.rowwise() -= feats.frames.colwise().mean();
  return feats;
}

}  // namespace spkdino
