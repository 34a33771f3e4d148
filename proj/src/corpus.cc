// corpus.cc

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

#include "corpus.h"

#include <sodium.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "common.h"
#include "text.h"

namespace spkdino {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// White noise floor of every synthetic utterance: -30 dBFS RMS.
constexpr double kNoiseFloorRms = 0.031622776601683794;
constexpr double kVoicePeak = 0.6;

std::string Base64Encode(const std::string& raw) {
  if (sodium_init() < 0) Fail(ErrorCode::kInternal, "libsodium initialisation failed");
  const int variant = sodium_base64_VARIANT_ORIGINAL;
  std::string out(sodium_base64_encoded_len(raw.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(),
                    reinterpret_cast<const unsigned char*>(raw.data()), raw.size(), variant);
  out.resize(std::char_traits<char>::length(out.c_str()));
  return out;
}

std::string Base64Decode(const std::string& b64) {
  if (sodium_init() < 0) Fail(ErrorCode::kInternal, "libsodium initialisation failed");
  std::string out(b64.size(), '\0');
  size_t len = 0;
  if (sodium_base642bin(reinterpret_cast<unsigned char*>(out.data()), out.size(),
                        b64.data(), b64.size(), nullptr, &len, nullptr,
                        sodium_base64_VARIANT_ORIGINAL) != 0)
    Fail(ErrorCode::kFormat, "invalid base64 synth parameters");
  out.resize(len);
  return out;
}

// Klatt-style two-pole resonator with unity gain at DC.
struct Resonator {
  double a = 1.0, b = 0.0, c = 0.0;
  double y1 = 0.0, y2 = 0.0;

  void Tune(double center_hz, double bandwidth_hz, double sample_rate) {
    double r = std::exp(-std::numbers::pi * bandwidth_hz / sample_rate);
    b = 2.0 * r * std::cos(kTwoPi * center_hz / sample_rate);
    c = -r * r;
    a = 1.0 - b - c;
  }
  double Step(double x) {
    double y = a * x + b * y1 + c * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

struct Syllable {
  size_t length;
  double amplitude;
  std::array<double, 3> formant_scale;
};

}  // namespace

void SpeakerProfile::Validate() const {
  if (!(fundamental_hz >= 80.0 && fundamental_hz <= 300.0))
    Fail(ErrorCode::kInvalidArgument, "speaker ", speaker_id, ": fundamental ",
         fundamental_hz, " Hz outside [80, 300]");
  for (int i = 0; i < 3; ++i) {
    if (!(formant_bandwidths[i] > 0.0))
      Fail(ErrorCode::kInvalidArgument, "speaker ", speaker_id, ": bandwidth must be > 0");
    if (i > 0 && !(formant_centers[i] > formant_centers[i - 1]))
      Fail(ErrorCode::kInvalidArgument, "speaker ", speaker_id,
           ": formant centers must be strictly increasing");
  }
  if (!(formant_centers[0] > 0.0))
    Fail(ErrorCode::kInvalidArgument, "speaker ", speaker_id, ": formant centers must be > 0");
  if (!(jitter >= 0.0 && jitter <= 0.1))
    Fail(ErrorCode::kInvalidArgument, "speaker ", speaker_id, ": jitter outside [0, 0.1]");
}

std::string SynthParams::Encode() const {
  std::ostringstream os;
  os << "spk=" << speaker.speaker_id << ";f0=" << FormatDouble(speaker.fundamental_hz)
     << ";fc=";
  for (int i = 0; i < 3; ++i)
    os << (i ? "," : "") << FormatDouble(speaker.formant_centers[i]);
  os << ";bw=";
  for (int i = 0; i < 3; ++i)
    os << (i ? "," : "") << FormatDouble(speaker.formant_bandwidths[i]);
  os << ";jit=" << FormatDouble(speaker.jitter) << ";dur=" << FormatDouble(duration)
     << ";sr=" << sample_rate;
  return Base64Encode(os.str());
}

SynthParams SynthParams::Decode(const std::string& b64) {
  SynthParams p;
  bool seen[7] = {};
  for (const auto& field : Split(Base64Decode(b64), ';')) {
    auto eq = field.find('=');
    if (eq == std::string::npos) Fail(ErrorCode::kFormat, "malformed synth field '", field, "'");
    std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    auto triple = [&](std::array<double, 3>* out) {
      auto parts = Split(value, ',');
      if (parts.size() != 3) Fail(ErrorCode::kFormat, "synth field ", key, " needs 3 values");
      for (int i = 0; i < 3; ++i) (*out)[i] = ParseDouble(parts[i], key);
    };
    if (key == "spk") { p.speaker.speaker_id = value; seen[0] = true; }
    else if (key == "f0") { p.speaker.fundamental_hz = ParseDouble(value, key); seen[1] = true; }
    else if (key == "fc") { triple(&p.speaker.formant_centers); seen[2] = true; }
    else if (key == "bw") { triple(&p.speaker.formant_bandwidths); seen[3] = true; }
    else if (key == "jit") { p.speaker.jitter = ParseDouble(value, key); seen[4] = true; }
    else if (key == "dur") { p.duration = ParseDouble(value, key); seen[5] = true; }
    else if (key == "sr") { p.sample_rate = static_cast<int>(ParseInt(value, key)); seen[6] = true; }
    else Fail(ErrorCode::kFormat, "unknown synth field '", key, "'");
  }
  for (bool s : seen)
    if (!s) Fail(ErrorCode::kFormat, "synth parameters incomplete");
  p.speaker.Validate();
  if (!(p.duration > 0.0) || p.sample_rate <= 0)
    Fail(ErrorCode::kFormat, "synth duration and sample rate must be positive");
  return p;
}

void Manifest::Add(ManifestEntry entry) {
  if (entry.utterance_id.empty()) Fail(ErrorCode::kInvalidArgument, "empty utterance id");
  if (!entry.synth && entry.wav_path.empty())
    Fail(ErrorCode::kInvalidArgument, "utterance ", entry.utterance_id, " has no source");
  auto [it, inserted] = index_.emplace(entry.utterance_id, entries_.size());
  if (!inserted)
    Fail(ErrorCode::kInvalidArgument, "duplicate utterance id ", entry.utterance_id);
  entries_.push_back(std::move(entry));
}

const ManifestEntry& Manifest::Find(const std::string& utterance_id) const {
  auto it = index_.find(utterance_id);
  if (it == index_.end()) Fail(ErrorCode::kNotFound, "unknown utterance id ", utterance_id);
  return entries_[it->second];
}

std::vector<std::string> Manifest::SpeakerIds() const {
  std::vector<std::string> ids;
  std::unordered_map<std::string, bool> seen;
  for (const auto& e : entries_)
    if (seen.emplace(e.speaker_id, true).second) ids.push_back(e.speaker_id);
  return ids;
}

std::string FormatManifestLine(const ManifestEntry& entry) {
  std::string source = entry.synth
                           ? "synth:" + entry.synth->Encode() + ":" + std::to_string(entry.seed)
                           : "wav:" + entry.wav_path;
  return entry.utterance_id + "\t" + entry.speaker_id + "\t" + source;
}

ManifestEntry ParseManifestLine(const std::string& line) {
  auto cols = Split(line, '\t');
  if (cols.size() != 3)
    Fail(ErrorCode::kFormat, "manifest line needs 3 tab-separated columns: '", line, "'");
  ManifestEntry e;
  e.utterance_id = std::string(Trim(cols[0]));
  e.speaker_id = std::string(Trim(cols[1]));
  std::string source(Trim(cols[2]));
  if (source.rfind("wav:", 0) == 0) {
    e.wav_path = source.substr(4);
    if (e.wav_path.empty()) Fail(ErrorCode::kFormat, "empty wav path for ", e.utterance_id);
  } else if (source.rfind("synth:", 0) == 0) {
    auto last = source.rfind(':');
    if (last <= 6) Fail(ErrorCode::kFormat, "synth source needs <params>:<seed>");
    e.synth = SynthParams::Decode(source.substr(6, last - 6));
    e.seed = ParseUint(source.substr(last + 1), "synth seed");
  } else {
    Fail(ErrorCode::kFormat, "unknown source kind in '", source, "'");
  }
  return e;
}

Manifest ReadManifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kIo, "cannot open manifest ", path);
  Manifest m;
  m.set_base_dir(std::filesystem::path(path).parent_path().string());
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (Trim(line).empty() || Trim(line).front() == '#') continue;
    try {
      m.Add(ParseManifestLine(line));
    } catch (const Error& e) {
      Fail(e.code(), path, ":", lineno, ": ", e.what());
    }
  }
  return m;
}

void WriteManifest(const Manifest& manifest, const std::string& path) {
  std::ofstream os(path);
  if (!os) Fail(ErrorCode::kIo, "cannot write manifest ", path);
  for (const auto& e : manifest.entries()) os << FormatManifestLine(e) << '\n';
}

SpeakerProfile RandomSpeaker(uint64_t seed, std::string speaker_id) {
  Rng rng(seed);
  SpeakerProfile s;
  s.speaker_id = std::move(speaker_id);
  s.fundamental_hz = 85.0 * std::pow(280.0 / 85.0, Uniform01(rng));
  s.formant_centers = {UniformIn(rng, 350.0, 850.0), UniformIn(rng, 1000.0, 2300.0),
                       UniformIn(rng, 2500.0, 3500.0)};
  s.formant_bandwidths = {UniformIn(rng, 50.0, 120.0), UniformIn(rng, 70.0, 160.0),
                          UniformIn(rng, 100.0, 220.0)};
  s.jitter = UniformIn(rng, 0.02, 0.08);
  return s;
}

Waveform Synthesize(const SynthParams& params, uint64_t seed) {
  params.speaker.Validate();
  const SpeakerProfile& spk = params.speaker;
  const double sr = params.sample_rate;
  const size_t n = static_cast<size_t>(std::llround(params.duration * sr));
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "synthesized utterance would be empty");
  Rng rng(seed);

  const double f0 = spk.fundamental_hz * (1.0 + spk.jitter * UniformIn(rng, -1.0, 1.0));
  const double contour_rate = UniformIn(rng, 0.15, 0.5);
  const double contour_depth = UniformIn(rng, 0.02, 0.06);
  const double contour_phase = UniformIn(rng, 0.0, kTwoPi);

  // Syllable-like segments with their own vowel quality and loudness.
  std::vector<Syllable> syllables;
  for (size_t covered = 0; covered < n;) {
    Syllable s;
    s.length = static_cast<size_t>(UniformIn(rng, 0.12, 0.30) * sr);
    s.amplitude = Uniform01(rng) < 0.15 ? 0.0 : UniformIn(rng, 0.5, 1.0);
    s.formant_scale = {UniformIn(rng, 0.75, 1.25), UniformIn(rng, 0.85, 1.15),
                       UniformIn(rng, 0.92, 1.08)};
    covered += s.length;
    syllables.push_back(s);
  }

  std::array<Resonator, 3> formants;
  std::array<double, 3> center = spk.formant_centers;
  double env = 0.0, phase = Uniform01(rng);
  const double formant_smooth = 1.0 - std::exp(-1.0 / (0.02 * sr));
  const double env_smooth = 1.0 - std::exp(-1.0 / (0.01 * sr));

  std::vector<double> voice(n);
  size_t syl = 0, syl_end = syllables[0].length;
  for (size_t i = 0; i < n; ++i) {
    if (i >= syl_end && syl + 1 < syllables.size()) syl_end += syllables[++syl].length;
    const Syllable& s = syllables[syl];
    double t = static_cast<double>(i) / sr;
    double f = f0 * (1.0 + contour_depth * std::sin(kTwoPi * contour_rate * t + contour_phase));
    phase += f / sr;
    phase -= std::floor(phase);
    double source = 2.0 * phase - 1.0 + 0.05 * Gaussian(rng);

    for (int k = 0; k < 3; ++k)
      center[k] += formant_smooth * (spk.formant_centers[k] * s.formant_scale[k] - center[k]);
    if (i % 16 == 0) {
      for (int k = 0; k < 3; ++k)
        formants[k].Tune(center[k], spk.formant_bandwidths[k], sr);
    }
    double y = source;
    for (auto& r : formants) y = r.Step(y);
    env += env_smooth * (s.amplitude - env);
    voice[i] = env * y;
  }

  double peak = 0.0;
  for (double v : voice) peak = std::max(peak, std::abs(v));
  Waveform w;
  w.sample_rate = params.sample_rate;
  w.samples.resize(n);
  double gain = peak > 0.0 ? kVoicePeak / peak : 0.0;
  for (size_t i = 0; i < n; ++i)
    w.samples[i] = gain * voice[i] + kNoiseFloorRms * Gaussian(rng);
  RescaleIfOverflow(&w);
  return w;
}

Manifest SynthCorpus(int n_speakers, int utts_per_speaker, double duration, uint64_t seed,
                     int sample_rate, double min_duration) {
  if (n_speakers < 2) Fail(ErrorCode::kInvalidArgument, "need at least 2 speakers");
  if (utts_per_speaker < 1)
    Fail(ErrorCode::kInvalidArgument, "need at least 1 utterance per speaker");
  if (sample_rate <= 0) Fail(ErrorCode::kInvalidArgument, "sample rate must be positive");
  if (duration < min_duration)
    Fail(ErrorCode::kInvalidArgument, "utterance duration ", duration,
         " s is too short: the segment plan needs at least ", min_duration, " s");
  Manifest m;
  for (int s = 0; s < n_speakers; ++s) {
    char spk_id[32];
    std::snprintf(spk_id, sizeof(spk_id), "spk%04d", s);
    SynthParams params;
    params.speaker = RandomSpeaker(DeriveSeed(seed, "speaker", s), spk_id);
    params.duration = duration;
    params.sample_rate = sample_rate;
    for (int u = 0; u < utts_per_speaker; ++u) {
      char utt_id[48];
      std::snprintf(utt_id, sizeof(utt_id), "%s-utt%04d", spk_id, u);
      ManifestEntry e;
      e.utterance_id = utt_id;
      e.speaker_id = spk_id;
      e.synth = params;
      e.seed = DeriveSeed(seed, "utterance", s, u);
      m.Add(std::move(e));
    }
  }
  return m;
}

Waveform Resolve(const Manifest& manifest, const ManifestEntry& entry) {
  if (entry.synth) return Synthesize(*entry.synth, entry.seed);
  std::filesystem::path p(entry.wav_path);
  if (p.is_relative() && !manifest.base_dir().empty())
    p = std::filesystem::path(manifest.base_dir()) / p;
  return LoadWav(p.string());
}

Waveform Resolve(const Manifest& manifest, const std::string& utterance_id) {
  return Resolve(manifest, manifest.Find(utterance_id));
}

}  // namespace spkdino
