// fbank.h

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

#ifndef SPKDINO_FBANK_H_
#define SPKDINO_FBANK_H_

#include "common.h"
#include "wav.h"

namespace spkdino {

struct FeatureConfig {
  int n_mels = 40;
  double win_seconds = 0.025;
  double hop_seconds = 0.010;
  double low_hz = 20.0;
  bool mean_norm = true;  // per-utterance mean subtraction over time

  void Validate() const;
};

/// T x D log-mel energies, one row per frame.
struct FeatureSequence {
  Matrix frames;
  double frame_hop = 0.010;

  int num_frames() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

inline constexpr double kLogFloor = 1e-10;

/// Hann-windowed power spectra through a triangular mel filterbank spanning
/// low_hz to Nyquist, natural log floored at 1e-10. T = 1 + (len - win) / hop.
FeatureSequence LogMel(const Waveform& w, const FeatureConfig& cfg);

/// D x (nfft/2 + 1) filterbank weights; exposed for tests.
Matrix MelFilterbank(int n_mels, size_t nfft, int sample_rate, double low_hz);

}  // namespace spkdino

#endif  // SPKDINO_FBANK_H_
