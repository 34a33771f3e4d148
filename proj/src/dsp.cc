// dsp.cc

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

#include "dsp.h"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace spkdino {

size_t NextPow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> HannWindow(size_t n) {
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  return w;
}

void PowerSpectrum(std::span<const double> frame, size_t nfft, std::vector<double>* out) {
  thread_local Eigen::FFT<double> fft;
  thread_local std::vector<double> buf;
  thread_local std::vector<std::complex<double>> spec;
  buf.assign(nfft, 0.0);
  std::copy(frame.begin(), frame.begin() + std::min(frame.size(), nfft), buf.begin());
  fft.fwd(spec, buf);
  out->resize(nfft / 2 + 1);
  for (size_t k = 0; k <= nfft / 2; ++k) (*out)[k] = std::norm(spec[k]);
}

std::vector<double> FftConvolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  size_t n = a.size() + b.size() - 1;
  size_t nfft = NextPow2(n);
  Eigen::FFT<double> fft;
  std::vector<double> pa(nfft, 0.0), pb(nfft, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<std::complex<double>> fa, fb;
  fft.fwd(fa, pa);
  fft.fwd(fb, pb);
  for (size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  std::vector<double> out;
  fft.inv(out, fa);
  out.resize(n);
  return out;
}

std::vector<double> LinearResample(std::span<const double> x, double step) {
  if (x.empty()) return {};
  size_t n_out = static_cast<size_t>(std::floor((x.size() - 1) / step)) + 1;
  std::vector<double> y(n_out);
  for (size_t i = 0; i < n_out; ++i) {
    double pos = static_cast<double>(i) * step;
    size_t i0 = static_cast<size_t>(pos);
    double frac = pos - static_cast<double>(i0);
    double a = x[std::min(i0, x.size() - 1)];
    double b = x[std::min(i0 + 1, x.size() - 1)];
    y[i] = a + frac * (b - a);
  }
  return y;
}

}  // namespace spkdino
