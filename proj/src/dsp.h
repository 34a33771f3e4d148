// dsp.h

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

#ifndef SPKDINO_DSP_H_
#define SPKDINO_DSP_H_

#include <complex>
#include <span>
#include <vector>

namespace spkdino {

size_t NextPow2(size_t n);

/// Periodic Hann window of length n (sums to a constant at hop n/2, n/3, ...).
std::vector<double> HannWindow(size_t n);

/// Power spectrum |X_k|^2 for k = 0..nfft/2 of `frame` zero-padded to nfft.
void PowerSpectrum(std::span<const double> frame, size_t nfft, std::vector<double>* out);

/// Full linear convolution (length a + b - 1) computed through the FFT.
std::vector<double> FftConvolve(std::span<const double> a, std::span<const double> b);

/// Reads x at fractional positions i * step by linear interpolation, producing
/// floor((n - 1) / step) + 1 samples. step > 1 shortens (raises pitch).
std::vector<double> LinearResample(std::span<const double> x, double step);

}  // namespace spkdino

#endif  // SPKDINO_DSP_H_
