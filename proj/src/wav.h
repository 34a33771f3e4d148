// wav.h

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

#ifndef SPKDINO_WAV_H_
#define SPKDINO_WAV_H_

#include <string>
#include <vector>

namespace spkdino {

/// Mono audio. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  size_t size() const { return samples.size(); }
  double Duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Peak level that mixing operations rescale to when a result would overflow.
inline constexpr double kMixPeak = 0.99;

/// Scales the waveform down so its peak is kMixPeak if it exceeds it.
/// Returns the applied gain (1 when untouched).
double RescaleIfOverflow(Waveform* w);

double Peak(const Waveform& w);
double MeanPower(const Waveform& w);

/// Reads a RIFF/WAVE file holding 16-bit little-endian PCM mono audio.
/// Samples are divided by 32768. Throws Error(kFormat) naming the violation
/// for non-PCM, multi-channel, wrong bit depth or truncated files.
Waveform LoadWav(const std::string& path);

/// Writes 16-bit PCM mono. Samples are rounded and clipped to int16 range.
void WriteWav(const Waveform& w, const std::string& path);

}  // namespace spkdino

#endif  // SPKDINO_WAV_H_
