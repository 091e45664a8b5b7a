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

#include "prosodyrl/env.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "prosodyrl/error.h"
#include "prosodyrl/rng.h"

namespace prosodyrl {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> partial_weights(int harmonics) {
  std::vector<double> g(harmonics);
  double sum = 0.0;
  for (int h = 0; h < harmonics; ++h) {
    g[h] = std::ldexp(1.0, -h);
    sum += g[h];
  }
  for (double& x : g) x /= sum;  // peak amplitude stays within [-1, 1]
  return g;
}

}  // namespace

TokenCodebook::TokenCodebook() {
  for (int i = 0; i < kLevels; ++i) {
    const double u = static_cast<double>(i) / (kLevels - 1);
    pitch_hz_[i] = 100.0 * std::pow(4.0, u);
    amplitude_[i] = 0.1 + 0.9 * u;
  }
}

std::uint64_t TokenCodebook::hash() const {
  std::uint64_t h = fnv1a64("codebook-v1");
  char buf[64];
  for (int i = 0; i < kLevels; ++i) {
    std::snprintf(buf, sizeof buf, "p%d=%.17g;a%d=%.17g;", i, pitch_hz_[i], i, amplitude_[i]);
    h = fnv1a64(buf, h);
  }
  return h;
}

int ToyVoiceConfig::token_samples() const {
  return static_cast<int>(std::lround(token_seconds * sample_rate));
}

void ToyVoiceConfig::validate() const {
  if (tokens_per_word <= 0 || !(token_seconds > 0.0) || sample_rate < 8000 ||
      harmonics <= 0 || !(crossfade_seconds >= 0.0) ||
      crossfade_seconds > token_seconds) {
    throw Error(ErrorKind::kInvalidConfig, "toy voice settings must be positive");
  }
}

Utterance decode_tokens(std::span<const Token> z, std::span<const std::string> words,
                        const ToyVoiceConfig& cfg, const TokenCodebook& codebook) {
  cfg.validate();
  if (words.empty()) throw Error(ErrorKind::kInvalidSequence, "empty word list");
  const std::size_t expected = words.size() * static_cast<std::size_t>(cfg.tokens_per_word);
  if (z.size() != expected) {
    throw Error(ErrorKind::kInvalidSequence,
                "expected " + std::to_string(expected) + " tokens, got " + std::to_string(z.size()));
  }
  for (Token t : z) {
    if (t < 0 || t >= codebook.size()) {
      throw Error(ErrorKind::kInvalidSequence, "token id out of range: " + std::to_string(t));
    }
  }

  const int ts = cfg.token_samples();
  const int half_fade = static_cast<int>(std::lround(cfg.crossfade_seconds * cfg.sample_rate / 2.0));
  const long total = static_cast<long>(z.size()) * ts;
  const std::vector<double> partials = partial_weights(cfg.harmonics);

  Utterance u;
  u.wave.sample_rate = cfg.sample_rate;
  u.wave.samples.assign(total, 0.0);

  double phase0 = 0.0;  // phase of token k at its joint
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double f = codebook.pitch_hz(TokenCodebook::pitch_level(z[k]));
    const double amp = codebook.amplitude(TokenCodebook::energy_level(z[k]));
    const double step = kTwoPi * f / cfg.sample_rate;
    const long joint = static_cast<long>(k) * ts;
    const long begin = k == 0 ? 0 : joint - half_fade;
    const long end = k + 1 == z.size() ? total : joint + ts + half_fade;

    for (long n = begin; n < end; ++n) {
      double gain = 1.0;
      if (k > 0 && n < joint + half_fade) {
        const double x = (n - begin + 0.5) / (2.0 * half_fade);
        gain = 0.5 - 0.5 * std::cos(std::numbers::pi * x);
      } else if (k + 1 < z.size() && n >= joint + ts - half_fade) {
        const double x = (n - (joint + ts - half_fade) + 0.5) / (2.0 * half_fade);
        gain = 0.5 + 0.5 * std::cos(std::numbers::pi * x);
      }
      const double phi = phase0 + step * static_cast<double>(n - joint);
      const double s1 = std::sin(phi);
      const double c2 = 2.0 * std::cos(phi);
      // sin((h+1)phi) = 2 cos(phi) sin(h phi) - sin((h-1)phi)
      double prev = 0.0, cur = s1, value = 0.0;
      for (double g : partials) {
        value += g * cur;
        const double next = c2 * cur - prev;
        prev = cur;
        cur = next;
      }
      u.wave.samples[n] += gain * amp * value;
    }
    phase0 = std::fmod(phase0 + step * ts, kTwoPi);
  }

  u.alignment.spans.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    const long first = static_cast<long>(i) * cfg.tokens_per_word * ts;
    const long last = first + static_cast<long>(cfg.tokens_per_word) * ts;
    u.alignment.spans.push_back({words[i], static_cast<double>(first) / cfg.sample_rate,
                                 static_cast<double>(last) / cfg.sample_rate});
  }
  return u;
}

ToyProsodyMap::ToyProsodyMap(const ToyVoiceConfig& voice, const TokenCodebook& codebook) {
  voice.validate();
  log_min_pitch_ = std::log(codebook.min_pitch_hz());
  log_pitch_span_ = std::log(codebook.max_pitch_hz()) - log_min_pitch_;
  min_amplitude_ = codebook.min_amplitude();
  amplitude_span_ = codebook.max_amplitude() - codebook.min_amplitude();

  // Periodic Hann: sum w^2 = 3N/8. One-sided spectrum holds half of the
  // Parseval energy N * sum (w x)^2.
  const std::vector<double> g = partial_weights(voice.harmonics);
  double power = 0.0;
  for (double x : g) power += 0.5 * x * x;
  const double n = std::lround(kFrameSeconds * voice.sample_rate);
  unit_energy_ = n * std::sqrt(3.0 * power / 16.0);
}

double ToyProsodyMap::normalized_pitch(double log_f0) const {
  return (log_f0 - log_min_pitch_) / log_pitch_span_;
}

double ToyProsodyMap::normalized_energy(double f_energy) const {
  return (f_energy / unit_energy_ - min_amplitude_) / amplitude_span_;
}

ProsodyPoint ToyProsodyMap::locate(std::span<const WordProsody> words) const {
  const SentenceStats s = sentence_stats(words);
  ProsodyPoint p;
  p.pitch = std::clamp(normalized_pitch(s.mu_pitch), 0.0, 1.0);
  p.energy = std::clamp(normalized_energy(s.mu_energy), 0.0, 1.0);
  return p;
}

VadVector ToyVadPredictor::at(const ProsodyPoint& p) const {
  VadVector v;
  v.valence = std::clamp(kNeutralCentroid.valence + 2.0 * (p.pitch - 0.5), 1.0, 7.0);
  v.arousal = std::clamp(kNeutralCentroid.arousal + 4.0 * (p.energy - 0.5), 1.0, 7.0);
  v.dominance = std::clamp(kNeutralCentroid.dominance + 2.0 * (p.energy - 0.5), 1.0, 7.0);
  return v;
}

VadVector ToyVadPredictor::predict(const UtteranceView& u) const {
  return at(map_.locate(u.words));
}

EmotionPrediction ToyEmotionClassifier::at(const ProsodyPoint& p) const {
  std::array<double, kNumEmotions> dist2{};
  int best = 0;
  for (int i = 0; i < kNumEmotions; ++i) {
    const double dp = p.pitch - centroids_.points[i].pitch;
    const double de = p.energy - centroids_.points[i].energy;
    dist2[i] = dp * dp + de * de;
    if (dist2[i] < dist2[best]) best = i;
  }
  double z = 0.0;
  for (double d2 : dist2) z += std::exp(-(d2 - dist2[best]) / centroids_.temperature);
  return {static_cast<Emotion>(best), 1.0 / z};
}

EmotionPrediction ToyEmotionClassifier::classify(const UtteranceView& u) const {
  return at(map_.locate(u.words));
}

VadVector toy_vad(const Waveform& w, const WordAlignment& a) {
  const std::vector<WordProsody> words = analyze_words(w, a);
  return ToyVadPredictor().predict({w, a, words});
}

EmotionPrediction toy_ser(const Waveform& w, const WordAlignment& a) {
  const std::vector<WordProsody> words = analyze_words(w, a);
  return ToyEmotionClassifier().classify({w, a, words});
}

void dump_environment(std::ostream& out, const ToyVoiceConfig& voice,
                      const TokenCodebook& codebook, const ToySerCentroids& c) {
  char buf[160];
  const ToyProsodyMap map(voice, codebook);
  out << "# toy environment manifest\n";
  std::snprintf(buf, sizeof buf, "codebook.size\t%d\ncodebook.hash\t%016llx\n", codebook.size(),
                static_cast<unsigned long long>(codebook.hash()));
  out << buf;
  for (int i = 0; i < TokenCodebook::kLevels; ++i) {
    std::snprintf(buf, sizeof buf, "pitch_level.%d\t%.6f Hz\n", i, codebook.pitch_hz(i));
    out << buf;
  }
  for (int j = 0; j < TokenCodebook::kLevels; ++j) {
    std::snprintf(buf, sizeof buf, "energy_level.%d\t%.6f\n", j, codebook.amplitude(j));
    out << buf;
  }
  out << "token\tpitch_level\tenergy_level\tpitch_hz\tamplitude\n";
  for (Token t = 0; t < codebook.size(); ++t) {
    const int pl = TokenCodebook::pitch_level(t), el = TokenCodebook::energy_level(t);
    std::snprintf(buf, sizeof buf, "%d\t%d\t%d\t%.6f\t%.6f\n", t, pl, el, codebook.pitch_hz(pl),
                  codebook.amplitude(el));
    out << buf;
  }
  std::snprintf(buf, sizeof buf,
                "voice.tokens_per_word\t%d\nvoice.token_seconds\t%.6f\nvoice.sample_rate\t%d\n"
                "voice.harmonics\t%d\nvoice.crossfade_seconds\t%.6f\n",
                voice.tokens_per_word, voice.token_seconds, voice.sample_rate, voice.harmonics,
                voice.crossfade_seconds);
  out << buf;
  std::snprintf(buf, sizeof buf, "prosody.unit_energy\t%.6f\n", map.unit_energy());
  out << buf;
  out << "vad.map\tvalence = 3.8494 + 2(p - 0.5); arousal = 4.2614 + 4(e - 0.5); "
         "dominance = 3.9072 + 2(e - 0.5); clamped to [1, 7]\n";
  out << "ser.centroid\temotion\tpitch\tenergy\n";
  for (int i = 0; i < kNumEmotions; ++i) {
    std::snprintf(buf, sizeof buf, "ser.centroid\t%s\t%.4f\t%.4f\n",
                  std::string(to_string(static_cast<Emotion>(i))).c_str(), c.points[i].pitch,
                  c.points[i].energy);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "ser.temperature\t%.4f\n", c.temperature);
  out << buf;
}

}  // namespace prosodyrl
