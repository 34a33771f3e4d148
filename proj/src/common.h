// common.h

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

#ifndef SPKDINO_COMMON_H_
#define SPKDINO_COMMON_H_

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace spkdino {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Mirrors the status codes of the C API one-to-one.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kIo = 2,
  kFormat = 3,
  kNumeric = 4,
  kNotFound = 5,
  kInternal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

namespace internal {
inline void Append(std::ostringstream&) {}
template <typename T, typename... Rest>
void Append(std::ostringstream& os, const T& v, const Rest&... rest) {
  os << v;
  Append(os, rest...);
}
}  // namespace internal

template <typename... Args>
[[noreturn]] void Fail(ErrorCode code, const Args&... args) {
  std::ostringstream os;
  internal::Append(os, args...);
  throw Error(code, os.str());
}

// Derives an independent 64-bit seed from a base seed, a stream tag and up to
// two indices. std::seed_seq has a fully specified mixing algorithm, so the
// result is the same on every conforming standard library.
inline uint64_t DeriveSeed(uint64_t base, std::string_view tag, uint64_t a = 0,
                           uint64_t b = 0) {
  uint32_t tag_hash = 2166136261u;  // FNV-1a
  for (unsigned char c : tag) tag_hash = (tag_hash ^ c) * 16777619u;
  std::seed_seq seq{static_cast<uint32_t>(base), static_cast<uint32_t>(base >> 32),
                    tag_hash,
                    static_cast<uint32_t>(a), static_cast<uint32_t>(a >> 32),
                    static_cast<uint32_t>(b), static_cast<uint32_t>(b >> 32)};
  uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<uint64_t>(out[0]) << 32) | out[1];
}

using Rng = std::mt19937_64;

// Uniform in [0, 1) from the top 53 bits; unlike std::uniform_real_distribution
// this is identical across standard library implementations.
inline double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double UniformIn(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * Uniform01(rng);
}

// Uniform integer in [0, n).
inline size_t UniformIndex(Rng& rng, size_t n) {
  return static_cast<size_t>(Uniform01(rng) * static_cast<double>(n)) % n;
}

// Standard normal via Box-Muller.
inline double Gaussian(Rng& rng) {
  double u1 = Uniform01(rng), u2 = Uniform01(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

template <typename It>
void Shuffle(It first, It last, Rng& rng) {
  // Fisher-Yates with our own index draw for cross-library determinism.
  for (auto n = last - first; n > 1; --n) {
    auto j = static_cast<decltype(n)>(UniformIndex(rng, static_cast<size_t>(n)));
    std::swap(first[n - 1], first[j]);
  }
}

}  // namespace spkdino

#endif  // SPKDINO_COMMON_H_
