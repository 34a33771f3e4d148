// fbank_test.cc

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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dsp.h"

namespace spkdino {
namespace {

Waveform Tone(double hz, size_t n) {
  Waveform w;
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    w.samples[i] = 0.3 * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / 16000.0);
  return w;
}

Waveform Noise(size_t n, uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  w.samples.resize(n);
  for (double& s : w.samples) s = 0.1 * Gaussian(rng);
  return w;
}

TEST(LogMel, FrameCount) {
  FeatureConfig cfg;
  EXPECT_EQ(LogMel(Noise(16000, 1), cfg).num_frames(), 98);
  EXPECT_EQ(LogMel(Noise(400, 1), cfg).num_frames(), 1);
  EXPECT_EQ(LogMel(Noise(559, 1), cfg).num_frames(), 1);
  EXPECT_EQ(LogMel(Noise(560, 1), cfg).num_frames(), 2);
  for (size_t len : {401u, 4321u, 48000u})
    EXPECT_EQ(LogMel(Noise(len, 2), cfg).num_frames(), 1 + static_cast<int>((len - 400) / 160));
  EXPECT_EQ(LogMel(Noise(16000, 1), cfg).dim(), 40);
  EXPECT_THROW(LogMel(Noise(399, 1), cfg), Error);
}

TEST(LogMel, SilenceHitsTheFloor) {
  Waveform zeros;
  zeros.samples.assign(8000, 0.0);
  FeatureConfig cfg;
  cfg.mean_norm = false;
  FeatureSequence raw = LogMel(zeros, cfg);
  for (long t = 0; t < raw.frames.rows(); ++t)
    for (long d = 0; d < raw.frames.cols(); ++d)
      ASSERT_DOUBLE_EQ(raw.frames(t, d), std::log(kLogFloor));
  cfg.mean_norm = true;
  EXPECT_LT(LogMel(zeros, cfg).frames.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LogMel, ToneArgmaxIsStableAndAtTheRightFilter) {
  FeatureConfig cfg;
  cfg.mean_norm = false;
  FeatureSequence f = LogMel(Tone(440.0, 16000), cfg);
  // The filter with the largest response at the FFT bin nearest 440 Hz.
  Matrix fb = MelFilterbank(40, 512, 16000, 20.0);
  long bin = std::lround(440.0 * 512 / 16000.0), expected = 0;
  fb.col(bin).maxCoeff(&expected);
  for (long t = 0; t < f.frames.rows(); ++t) {
    long arg = 0;
    f.frames.row(t).maxCoeff(&arg);
    ASSERT_EQ(arg, expected) << "frame " << t;
  }
}

TEST(LogMel, ShiftByOneHopShiftsFrames) {
  FeatureConfig cfg;
  cfg.mean_norm = false;
  Waveform w = Noise(8000, 3);
  Waveform shifted;
  shifted.samples.assign(w.samples.begin() + 160, w.samples.end());
  FeatureSequence a = LogMel(w, cfg), b = LogMel(shifted, cfg);
  ASSERT_EQ(b.num_frames(), a.num_frames() - 1);
  EXPECT_LT((a.frames.bottomRows(b.num_frames()) - b.frames).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(LogMel, MeanNormalisedColumnsAreCentered) {
  FeatureSequence f = LogMel(Noise(16000, 4), FeatureConfig());
  EXPECT_LT(f.frames.colwise().mean().cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_TRUE(f.frames.allFinite());
}

TEST(LogMel, MatchesDirectComputation) {
  Waveform w = Noise(1000, 5);
  FeatureConfig cfg;
  cfg.mean_norm = false;
  cfg.n_mels = 8;
  FeatureSequence f = LogMel(w, cfg);
  Matrix fb = MelFilterbank(8, 512, 16000, 20.0);
  std::vector<double> win = HannWindow(400);
  for (long t = 0; t < f.frames.rows(); ++t) {
    // Naive DFT of the windowed frame.
    std::vector<double> power(257, 0.0);
    for (int k = 0; k <= 256; ++k) {
      double re = 0.0, im = 0.0;
      for (int i = 0; i < 400; ++i) {
        double x = w.samples[t * 160 + i] * win[i];
        re += x * std::cos(2.0 * std::numbers::pi * k * i / 512.0);
        im -= x * std::sin(2.0 * std::numbers::pi * k * i / 512.0);
      }
      power[k] = re * re + im * im;
    }
    for (int m = 0; m < 8; ++m) {
      double e = 0.0;
      for (int k = 0; k <= 256; ++k) e += fb(m, k) * power[k];
      EXPECT_NEAR(f.frames(t, m), std::log(std::max(e, kLogFloor)), 1e-9);
    }
  }
}

TEST(MelFilterbank, TrianglesCoverTheBand) {
  Matrix fb = MelFilterbank(40, 512, 16000, 20.0);
  EXPECT_GE(fb.minCoeff(), 0.0);
  EXPECT_LE(fb.maxCoeff(), 1.0);
  for (long m = 0; m < fb.rows(); ++m) EXPECT_GT(fb.row(m).sum(), 0.0) << m;
  // Below the low edge nothing responds.
  EXPECT_EQ(fb.col(0).sum(), 0.0);
  EXPECT_THROW(MelFilterbank(40, 512, 16000, 9000.0), Error);
}

}  // namespace
}  // namespace spkdino
