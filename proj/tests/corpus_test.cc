// corpus_test.cc

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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "common.h"
#include "dsp.h"

namespace spkdino {
namespace {

TEST(Corpus, CountsAndDistinctSpeakers) {
  Manifest m = SynthCorpus(2, 1, 6.0, 7);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_NE(m.entries()[0].speaker_id, m.entries()[1].speaker_id);
  EXPECT_EQ(SynthCorpus(20, 50, 6.0, 1).size(), 1000u);
}

TEST(Corpus, RejectsTooShortDurationNamingTheMinimum) {
  try {
    SynthCorpus(2, 1, 5.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("6"), std::string::npos);
  }
  EXPECT_THROW(SynthCorpus(1, 3, 6.0, 1), Error);
}

TEST(Corpus, SynthesisIsDeterministic) {
  Manifest a = SynthCorpus(3, 2, 6.0, 11);
  Manifest b = SynthCorpus(3, 2, 6.0, 11);
  for (size_t i = 0; i < a.size(); ++i) {
    Waveform x = Resolve(a, a.entries()[i]);
    Waveform y = Resolve(b, b.entries()[i].utterance_id);
    ASSERT_EQ(x.samples, y.samples);
    EXPECT_EQ(x.size(), 96000u);
    EXPECT_LE(Peak(x), 1.0);
  }
  EXPECT_THROW(Resolve(a, "no-such-utterance"), Error);
}

TEST(Corpus, ManifestLinesRoundTrip) {
  Manifest m = SynthCorpus(2, 2, 6.0, 3);
  const std::string path =
      (std::filesystem::temp_directory_path() / "spkdino_corpus_test.manifest").string();
  WriteManifest(m, path);
  Manifest r = ReadManifest(path);
  ASSERT_EQ(r.size(), m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    EXPECT_EQ(FormatManifestLine(r.entries()[i]), FormatManifestLine(m.entries()[i]));
    EXPECT_EQ(Resolve(r, r.entries()[i]).samples, Resolve(m, m.entries()[i]).samples);
  }
  std::filesystem::remove(path);

  ManifestEntry w = ParseManifestLine("u1\ts1\twav:audio/u1.wav");
  EXPECT_EQ(w.wav_path, "audio/u1.wav");
  EXPECT_FALSE(w.synth.has_value());
  EXPECT_THROW(ParseManifestLine("u1\ts1"), Error);
  EXPECT_THROW(ParseManifestLine("u1\ts1\tmp3:x"), Error);
  Manifest dup;
  dup.Add(w);
  EXPECT_THROW(dup.Add(w), Error);
}

TEST(Corpus, ProfileValidation) {
  SpeakerProfile p;
  EXPECT_NO_THROW(p.Validate());
  p.fundamental_hz = 400.0;
  EXPECT_THROW(p.Validate(), Error);
  p = SpeakerProfile();
  p.formant_centers = {800.0, 700.0, 2500.0};
  EXPECT_THROW(p.Validate(), Error);
  p = SpeakerProfile();
  p.jitter = 0.2;
  EXPECT_THROW(p.Validate(), Error);
  for (int s = 0; s < 50; ++s) EXPECT_NO_THROW(RandomSpeaker(s, "x").Validate());
}

// Long-term average log spectrum of an utterance, in 64 coarse bands.
std::vector<double> AverageSpectrum(const Waveform& w) {
  const size_t n = 512;
  std::vector<double> acc(n / 2 + 1, 0.0), power;
  for (size_t start = 0; start + n <= w.size(); start += n) {
    std::span<const double> frame(w.samples.data() + start, n);
    PowerSpectrum(frame, n, &power);
    for (size_t k = 0; k < acc.size(); ++k) acc[k] += power[k];
  }
  std::vector<double> bands(64, 0.0);
  for (size_t k = 0; k < 256; ++k) bands[k / 4] += acc[k];
  for (double& b : bands) b = std::log(b + 1e-12);
  return bands;
}

TEST(Corpus, SpeakersAreSeparableAtTheSource) {
  Manifest m = SynthCorpus(6, 4, 6.0, 21);
  std::vector<std::vector<double>> spectra;
  for (const auto& e : m.entries()) spectra.push_back(AverageSpectrum(Resolve(m, e)));
  double within = 0.0, between = 0.0;
  int n_within = 0, n_between = 0;
  for (size_t i = 0; i < spectra.size(); ++i)
    for (size_t j = i + 1; j < spectra.size(); ++j) {
      double d = 0.0;
      for (size_t k = 0; k < spectra[i].size(); ++k)
        d += (spectra[i][k] - spectra[j][k]) * (spectra[i][k] - spectra[j][k]);
      d = std::sqrt(d);
      if (m.entries()[i].speaker_id == m.entries()[j].speaker_id) {
        within += d;
        ++n_within;
      } else {
        between += d;
        ++n_between;
      }
    }
  EXPECT_GT(between / n_between, within / n_within);
}

}  // namespace
}  // namespace spkdino
