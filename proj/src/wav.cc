// wav.cc

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

#include "wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "common.h"

namespace spkdino {

namespace {

uint32_t ReadU32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t ReadU16(const unsigned char* p) { return p[0] | (p[1] << 8); }

void PutU32(std::string* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void PutU16(std::string* out, uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>(v >> 8));
}

}  // namespace

double Peak(const Waveform& w) {
  double peak = 0.0;
  for (double s : w.samples) peak = std::max(peak, std::abs(s));
  return peak;
}

double MeanPower(const Waveform& w) {
  if (w.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : w.samples) acc += s * s;
  return acc / static_cast<double>(w.samples.size());
}

double RescaleIfOverflow(Waveform* w) {
  double peak = Peak(*w);
  if (peak <= kMixPeak) return 1.0;
  double gain = kMixPeak / peak;
  for (double& s : w->samples) s *= gain;
  return gain;
}

Waveform LoadWav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorCode::kIo, "cannot open wav file ", path);
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0)
    Fail(ErrorCode::kFormat, path, ": not a RIFF/WAVE file");

  bool have_fmt = false;
  int sample_rate = 0;
  size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const unsigned char* chunk = data.data() + pos;
    uint32_t chunk_size = ReadU32(chunk + 4);
    size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16 || body + 16 > data.size())
        Fail(ErrorCode::kFormat, path, ": truncated fmt chunk");
      uint16_t format = ReadU16(data.data() + body);
      uint16_t channels = ReadU16(data.data() + body + 2);
      sample_rate = static_cast<int>(ReadU32(data.data() + body + 4));
      uint16_t bits = ReadU16(data.data() + body + 14);
      if (format != 1) Fail(ErrorCode::kFormat, path, ": not PCM (format tag ", format, ")");
      if (channels != 1)
        Fail(ErrorCode::kFormat, path, ": expected mono, found ", channels, " channels");
      if (bits != 16)
        Fail(ErrorCode::kFormat, path, ": expected 16-bit samples, found ", bits);
      if (sample_rate <= 0) Fail(ErrorCode::kFormat, path, ": invalid sample rate");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) Fail(ErrorCode::kFormat, path, ": data chunk before fmt chunk");
      if (body + chunk_size > data.size())
        Fail(ErrorCode::kFormat, path, ": truncated data chunk (header says ",
             chunk_size, " bytes, file has ", data.size() - body, ")");
      if (chunk_size % 2 != 0) Fail(ErrorCode::kFormat, path, ": odd data chunk size");
      Waveform w;
      w.sample_rate = sample_rate;
      w.samples.resize(chunk_size / 2);
      for (size_t i = 0; i < w.samples.size(); ++i) {
        auto v = static_cast<int16_t>(ReadU16(data.data() + body + 2 * i));
        w.samples[i] = v / 32768.0;
      }
      if (w.samples.empty()) Fail(ErrorCode::kFormat, path, ": no samples");
      return w;
    }
    pos = body + chunk_size + (chunk_size & 1);
  }
  Fail(ErrorCode::kFormat, path, have_fmt ? ": missing data chunk" : ": missing fmt chunk");
}

void WriteWav(const Waveform& w, const std::string& path) {
  std::string out;
  uint32_t data_bytes = static_cast<uint32_t>(w.samples.size() * 2);
  out.append("RIFF");
  PutU32(&out, 36 + data_bytes);
  out.append("WAVEfmt ");
  PutU32(&out, 16);
  PutU16(&out, 1);
  PutU16(&out, 1);
  PutU32(&out, static_cast<uint32_t>(w.sample_rate));
  PutU32(&out, static_cast<uint32_t>(w.sample_rate) * 2);
  PutU16(&out, 2);
  PutU16(&out, 16);
  out.append("data");
  PutU32(&out, data_bytes);
  for (double s : w.samples) {
    double v = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    PutU16(&out, static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorCode::kIo, "cannot write wav file ", path);
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace spkdino
