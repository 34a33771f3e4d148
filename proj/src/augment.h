// augment.h

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

#ifndef SPKDINO_AUGMENT_H_
#define SPKDINO_AUGMENT_H_

#include <cstdint>
#include <vector>

#include "wav.h"

namespace spkdino {

/// Probabilities and choice sets of the perturbation pipeline. The additive
/// noise and reverberation branch shares one probability; when it fires, the
/// two are chosen with equal odds.
struct AugmentConfig {
  double p_pitch = 0.0;
  std::vector<double> pitch_cents_choices{-200.0, 200.0};
  double p_tempo = 0.0;
  std::vector<double> tempo_ratio_choices{0.9, 1.1};
  double p_noise_reverb = 0.0;
  double snr_low_db = 5.0;
  double snr_high_db = 20.0;
  std::vector<Waveform> noise_bank;
  std::vector<Waveform> ir_bank;

  void Validate() const;
};

/// L long (global) and M short (local) crops per utterance.
struct SegmentPlan {
  int n_long = 2;
  double long_seconds = 3.0;
  int n_short = 4;
  double short_seconds = 2.0;

  void Validate() const;
  int total() const { return n_long + n_short; }
};

enum class ViewKind { kLong, kShort };

struct View {
  ViewKind kind;
  Waveform audio;
};

struct NoiseMix {
  Waveform audio;
  double noise_gain = 0.0;    // g applied to the noise before summing
  double output_gain = 1.0;   // overflow rescale applied after summing
  bool silent_signal = false; // signal had zero power; noise added at -20 dBFS
};

/// Shifts pitch by `cents` while keeping the duration: resample by
/// 2^(cents/1200), then time-stretch back to the input length.
Waveform PitchShift(const Waveform& w, double cents);

/// WSOLA time-scale modification: 30 ms frames, 10 ms synthesis hop, 7.5 ms
/// similarity search. Output has round(len / ratio) samples; pitch is kept.
Waveform TempoStretch(const Waveform& w, double ratio);

/// w + g * noise[0:len(w)] with g set for the requested SNR over the segment.
NoiseMix AddNoise(const Waveform& w, const Waveform& noise, double snr_db);

/// Convolution with `ir`, truncated to len(w) and rescaled to the input peak.
Waveform Reverberate(const Waveform& w, const Waveform& ir);

/// Shortest utterance (seconds) that BuildViews accepts for this plan.
double MinimumDuration(const AugmentConfig& cfg, const SegmentPlan& plan);

/// Multi-crop input for one utterance: n_long long views followed by n_short
/// short views. Pitch is decided once for the whole utterance; tempo and the
/// noise/reverb branch are decided independently per segment.
std::vector<View> BuildViews(const Waveform& w, const AugmentConfig& cfg,
                             const SegmentPlan& plan, uint64_t seed);

/// Coloured noises and babble-like mixtures, each `seconds` long at RMS 0.1.
std::vector<Waveform> MakeNoiseBank(int count, double seconds, int sample_rate,
                                    uint64_t seed);

/// Exponentially decaying noise bursts behind a direct path, RT60 in
/// [0.2, 0.8] s.
std::vector<Waveform> MakeIrBank(int count, int sample_rate, uint64_t seed);

}  // namespace spkdino

#endif  // SPKDINO_AUGMENT_H_
