// Copyright 2026 The prosodyrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "prosodyrl/env.h"
#include "prosodyrl/error.h"
#include "prosodyrl/rewards.h"
#include "prosodyrl/signal.h"

using namespace prosodyrl;

namespace {

std::vector<std::string> words(int n) {
  std::vector<std::string> w;
  for (int i = 0; i < n; ++i) w.push_back("w" + std::to_string(i));
  return w;
}

Utterance repeated(Token t, int n_words, const ToyVoiceConfig& cfg = {}) {
  const TokenSequence z(static_cast<std::size_t>(n_words * cfg.tokens_per_word), t);
  return decode_tokens(z, words(n_words), cfg);
}

}  // namespace

TEST_CASE("codebook layout") {
  const TokenCodebook cb;
  CHECK(cb.size() == 64);
  CHECK(cb.min_pitch_hz() == doctest::Approx(100.0));
  CHECK(cb.max_pitch_hz() == doctest::Approx(400.0));
  CHECK(cb.min_amplitude() == doctest::Approx(0.1));
  CHECK(cb.max_amplitude() == doctest::Approx(1.0));
  for (int l = 1; l < TokenCodebook::kLevels; ++l) {
    CHECK(std::log(cb.pitch_hz(l) / cb.pitch_hz(l - 1)) == doctest::Approx(std::log(4.0) / 7.0));
    CHECK(cb.amplitude(l) - cb.amplitude(l - 1) == doctest::Approx(0.9 / 7.0));
  }
  std::set<std::pair<int, int>> seen;
  for (Token t = 0; t < cb.size(); ++t) {
    const int p = TokenCodebook::pitch_level(t), e = TokenCodebook::energy_level(t);
    CHECK(TokenCodebook::token(p, e) == t);
    seen.insert({p, e});
  }
  CHECK(seen.size() == 64);
  CHECK(cb.hash() == TokenCodebook().hash());
}

TEST_CASE("decode_tokens: one word of a steady token") {
  const TokenCodebook cb;
  // Nearest codebook entry to 220 Hz at amplitude 0.5.
  int pl = 0, el = 0;
  for (int l = 0; l < 8; ++l) {
    if (std::abs(cb.pitch_hz(l) - 220.0) < std::abs(cb.pitch_hz(pl) - 220.0)) pl = l;
    if (std::abs(cb.amplitude(l) - 0.5) < std::abs(cb.amplitude(el) - 0.5)) el = l;
  }
  const Utterance u = repeated(TokenCodebook::token(pl, el), 1);
  CHECK(u.wave.sample_rate == 16000);
  CHECK(u.wave.samples.size() == 3200);
  REQUIRE(u.alignment.spans.size() == 1);
  CHECK(u.alignment.spans[0].start == 0.0);
  CHECK(u.alignment.spans[0].end == doctest::Approx(0.2));
  const FrameTrack f0 = estimate_f0(u.wave);
  for (std::size_t k = 1; k + 1 < f0.values.size(); ++k) {
    CHECK(std::abs(f0.values[k] - cb.pitch_hz(pl)) <= 0.02 * cb.pitch_hz(pl));
    CHECK(std::abs(f0.values[k] - 220.0) <= 0.02 * 220.0);
  }
}

TEST_CASE("decode_tokens: louder word has more energy") {
  const TokenCodebook cb;
  int lo = 0, hi = 0;
  for (int l = 0; l < 8; ++l) {
    if (std::abs(cb.amplitude(l) - 0.2) < std::abs(cb.amplitude(lo) - 0.2)) lo = l;
    if (std::abs(cb.amplitude(l) - 0.8) < std::abs(cb.amplitude(hi) - 0.8)) hi = l;
  }
  TokenSequence z(4, TokenCodebook::token(3, lo));
  z.insert(z.end(), 4, TokenCodebook::token(3, hi));
  const Utterance u = decode_tokens(z, words(2));
  const auto f = analyze_words(u.wave, u.alignment);
  CHECK(f[1].f_energy > f[0].f_energy);
}

TEST_CASE("decode_tokens: invalid sequences") {
  try {
    decode_tokens(TokenSequence{}, std::vector<std::string>{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidSequence);
  }
  try {
    decode_tokens(TokenSequence(5, 0), words(1));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidSequence);
  }
  CHECK_THROWS_AS(decode_tokens(TokenSequence(4, 64), words(1)), Error);
}

TEST_CASE("toy_vad: centre and extremes") {
  const ToyVadPredictor vad;
  const VadVector mid = vad.at({0.5, 0.5});
  CHECK(mid.valence == kNeutralCentroid.valence);
  CHECK(mid.arousal == kNeutralCentroid.arousal);
  CHECK(mid.dominance == kNeutralCentroid.dominance);
  CHECK(vad_distance(mid) == 0.0);
  CHECK(bin_of(vad_distance(mid)) == Intensity::kWeak);

  // Oracle for the extremes: offsets (+-1, +-2, +-1).
  CHECK(vad_distance(vad.at({1.0, 1.0})) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));
  CHECK(vad_distance(vad.at({0.0, 0.0})) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));

  // Half the words one level below the midpoint and half one above, in
  // both pitch and energy.
  TokenSequence z;
  for (int w = 0; w < 8; ++w) z.insert(z.end(), 4, w % 2 ? TokenCodebook::token(4, 4) : TokenCodebook::token(3, 3));
  const Utterance u = decode_tokens(z, words(8));
  const double d_mid = vad_distance(toy_vad(u.wave, u.alignment));
  CHECK(d_mid < 0.3);
  CHECK(bin_of(d_mid) == Intensity::kWeak);

  const Utterance top = repeated(63, 8);
  const Utterance bottom = repeated(0, 8);
  const double d_top = vad_distance(toy_vad(top.wave, top.alignment));
  const double d_bottom = vad_distance(toy_vad(bottom.wave, bottom.alignment));
  CHECK(d_top == doctest::Approx(std::sqrt(6.0)).epsilon(0.01));
  CHECK(d_bottom == doctest::Approx(d_top).epsilon(0.02));
  CHECK(bin_of(d_top) == Intensity::kStrong);
  CHECK(bin_of(d_bottom) == Intensity::kStrong);
}

TEST_CASE("toy_vad: output stays in the cube") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    TokenSequence z(16);
    for (auto& t : z) t = static_cast<Token>(rng() % 64);
    const Utterance u = decode_tokens(z, words(4));
    const VadVector v = toy_vad(u.wave, u.alignment);
    CHECK_NOTHROW(v.validate());
  }
}

TEST_CASE("toy_ser: centroids and ties") {
  const ToyEmotionClassifier ser;
  CHECK(ser.at({0.95, 0.95}).emotion == Emotion::kHappy);
  CHECK(ser.at({0.5, 0.5}).emotion == Emotion::kNeutral);
  for (int c = 0; c < kNumEmotions; ++c) {
    const EmotionPrediction p = ser.at(ser.centroids().points[c]);
    CHECK(static_cast<int>(p.emotion) == c);
    CHECK(p.confidence > 0.0);
    CHECK(p.confidence <= 1.0);
  }

  // Centroids on exact binary fractions so the tie is exact.
  ToySerCentroids c;
  c.points = {{{0.5, 0.5}, {0.25, 0.75}, {0.75, 0.75}, {0.25, 0.25}, {0.75, 0.25}}};
  const ToyEmotionClassifier tied(ToyProsodyMap(), c);
  CHECK(tied.at({0.5, 1.0}).emotion == Emotion::kAngry);      // angry vs happy
  CHECK(tied.at({1.0, 0.5}).emotion == Emotion::kHappy);      // happy vs surprise
  CHECK(tied.at({0.375, 0.625}).emotion == Emotion::kNeutral);  // neutral vs angry

  const Utterance hot = repeated(63, 4);
  CHECK(toy_ser(hot.wave, hot.alignment).emotion == Emotion::kHappy);
  const Utterance low = repeated(TokenCodebook::token(0, 0), 4);
  CHECK(toy_ser(low.wave, low.alignment).emotion == Emotion::kSad);
}

TEST_CASE("coverage: single repeated tokens") {
  // Every (emotion, bin) pair except neutral-strong is realized by some
  // token repeated over a sentence.
  std::set<std::pair<int, int>> cells;
  for (Token t = 0; t < 64; ++t) {
    const Utterance u = repeated(t, 8);
    const Emotion e = toy_ser(u.wave, u.alignment).emotion;
    const Intensity r = bin_of(vad_distance(toy_vad(u.wave, u.alignment)));
    cells.insert({static_cast<int>(e), static_cast<int>(r)});
  }
  for (int c = 0; c < kNumEmotions; ++c) {
    for (int r = 0; r < kNumIntensities; ++r) {
      CAPTURE(c);
      CAPTURE(r);
      const bool neutral_strong = c == 0 && r == 2;
      CHECK(cells.count({c, r}) == (neutral_strong ? 0u : 1u));
    }
  }
}

TEST_CASE("coverage: neutral-strong is unreachable anywhere in the square") {
  // The neutral region lies inside |p - 1/2| + |e - 1/2| < 0.45, where the
  // distance peaks at sqrt(20) * 0.45 < t2.
  const ToyEmotionClassifier ser;
  const ToyVadPredictor vad;
  double worst = 0.0;
  for (int i = 0; i <= 400; ++i) {
    for (int j = 0; j <= 400; ++j) {
      const ProsodyPoint p{i / 400.0, j / 400.0};
      if (ser.at(p).emotion != Emotion::kNeutral) continue;
      worst = std::max(worst, vad_distance(vad.at(p)));
    }
  }
  CHECK(worst <= std::sqrt(20.0) * 0.45 + 1e-9);
  CHECK(worst < IntensityBins{}.t2);
}

TEST_CASE("property: louder tokens never lower arousal") {
  std::mt19937_64 rng(9);
  const ToyVadPredictor vad;
  for (int trial = 0; trial < 40; ++trial) {
    TokenSequence z(24);
    for (auto& t : z) t = static_cast<Token>(rng() % 64);
    TokenSequence louder = z;
    for (auto& t : louder) {
      const int e = TokenCodebook::energy_level(t);
      t = TokenCodebook::token(TokenCodebook::pitch_level(t), std::min(7, e + 1));
    }
    const Utterance a = decode_tokens(z, words(6));
    const Utterance b = decode_tokens(louder, words(6));
    CHECK(toy_vad(b.wave, b.alignment).arousal >= toy_vad(a.wave, a.alignment).arousal);
  }
}

TEST_CASE("property: full pipeline is bit-reproducible") {
  std::mt19937_64 rng(4);
  TokenSequence z(32);
  for (auto& t : z) t = static_cast<Token>(rng() % 64);
  const Utterance a = decode_tokens(z, words(8));
  const Utterance b = decode_tokens(z, words(8));
  CHECK(a.wave.samples == b.wave.samples);
  const VadVector va = toy_vad(a.wave, a.alignment), vb = toy_vad(b.wave, b.alignment);
  CHECK(va.valence == vb.valence);
  CHECK(va.arousal == vb.arousal);
  CHECK(va.dominance == vb.dominance);
  const EmotionPrediction pa = toy_ser(a.wave, a.alignment), pb = toy_ser(b.wave, b.alignment);
  CHECK(pa.emotion == pb.emotion);
  CHECK(pa.confidence == pb.confidence);
}

TEST_CASE("voice config and manifest") {
  ToyVoiceConfig cfg;
  CHECK(cfg.token_samples() == 800);
  cfg.harmonics = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);

  std::ostringstream out;
  dump_environment(out);
  const std::string s = out.str();
  CHECK(s.find("codebook") != std::string::npos);
  CHECK(s.find("surprise") != std::string::npos);
}
