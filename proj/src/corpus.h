// corpus.h

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

#ifndef SPKDINO_CORPUS_H_
#define SPKDINO_CORPUS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wav.h"

namespace spkdino {

/// Voice of one synthetic speaker: a glottal pulse train at fundamental_hz
/// shaped by three resonances.
struct SpeakerProfile {
  std::string speaker_id;
  double fundamental_hz = 120.0;
  std::array<double, 3> formant_centers{500.0, 1500.0, 2500.0};
  std::array<double, 3> formant_bandwidths{80.0, 100.0, 120.0};
  double jitter = 0.05;  // per-utterance relative f0 variation

  /// Throws Error(kInvalidArgument) if an invariant is violated.
  void Validate() const;
};

/// Everything needed to re-render one synthetic utterance, together with a seed.
struct SynthParams {
  SpeakerProfile speaker;
  double duration = 6.0;
  int sample_rate = 16000;

  std::string Encode() const;  // base64 of a key=value text
  static SynthParams Decode(const std::string& b64);
};

struct ManifestEntry {
  std::string utterance_id;
  std::string speaker_id;
  std::string wav_path;               // set for wav: sources
  std::optional<SynthParams> synth;   // set for synth: sources
  uint64_t seed = 0;
};

/// Ordered, immutable-after-construction list of utterances.
class Manifest {
 public:
  Manifest() = default;

  void Add(ManifestEntry entry);  // throws on duplicate utterance id
  const std::vector<ManifestEntry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  const ManifestEntry& Find(const std::string& utterance_id) const;
  bool Contains(const std::string& utterance_id) const {
    return index_.count(utterance_id) > 0;
  }
  std::vector<std::string> SpeakerIds() const;  // in first-appearance order

  /// Directory that relative wav paths are resolved against.
  void set_base_dir(std::string dir) { base_dir_ = std::move(dir); }
  const std::string& base_dir() const { return base_dir_; }

 private:
  std::vector<ManifestEntry> entries_;
  std::unordered_map<std::string, size_t> index_;
  std::string base_dir_;
};

/// Line format: utterance_id TAB speaker_id TAB (wav:<path> | synth:<b64>:<seed>)
Manifest ReadManifest(const std::string& path);
void WriteManifest(const Manifest& manifest, const std::string& path);
std::string FormatManifestLine(const ManifestEntry& entry);
ManifestEntry ParseManifestLine(const std::string& line);

SpeakerProfile RandomSpeaker(uint64_t seed, std::string speaker_id);

/// Renders one utterance. A pure function of (params, seed).
Waveform Synthesize(const SynthParams& params, uint64_t seed);

/// n_speakers x utts_per_speaker synthetic utterances. `min_duration` is the
/// shortest utterance the downstream segment plan can crop from.
Manifest SynthCorpus(int n_speakers, int utts_per_speaker, double duration,
                     uint64_t seed, int sample_rate = 16000,
                     double min_duration = 6.0);

Waveform Resolve(const Manifest& manifest, const std::string& utterance_id);
Waveform Resolve(const Manifest& manifest, const ManifestEntry& entry);

}  // namespace spkdino

#endif  // SPKDINO_CORPUS_H_
