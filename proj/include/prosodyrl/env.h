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

// Deterministic toy speech environment: a token-to-waveform decoder, a VAD
// predictor and an emotion classifier. The predictors sit behind abstract
// interfaces so real models can replace them without touching rewards or
// training.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "prosodyrl/rewards.h"
#include "prosodyrl/signal.h"

namespace prosodyrl {

using Token = int;
using TokenSequence = std::vector<Token>;

// 8 pitch levels x 8 energy levels; token id = pitch_level * 8 + energy_level.
class TokenCodebook {
 public:
  static constexpr int kLevels = 8;

  TokenCodebook();

  int size() const { return kLevels * kLevels; }
  double pitch_hz(int level) const { return pitch_hz_.at(level); }
  double amplitude(int level) const { return amplitude_.at(level); }
  double min_pitch_hz() const { return pitch_hz_.front(); }
  double max_pitch_hz() const { return pitch_hz_.back(); }
  double min_amplitude() const { return amplitude_.front(); }
  double max_amplitude() const { return amplitude_.back(); }

  static int pitch_level(Token t) { return t / kLevels; }
  static int energy_level(Token t) { return t % kLevels; }
  static Token token(int pitch_level, int energy_level) {
    return pitch_level * kLevels + energy_level;
  }

  // Fingerprint over every table entry; checkpoints carry it.
  std::uint64_t hash() const;

 private:
  std::array<double, kLevels> pitch_hz_{};
  std::array<double, kLevels> amplitude_{};
};

struct ToyVoiceConfig {
  int tokens_per_word = 4;
  double token_seconds = 0.050;
  int sample_rate = 16000;
  int harmonics = 3;
  double crossfade_seconds = 0.005;

  int token_samples() const;
  void validate() const;
};

struct Utterance {
  Waveform wave;
  WordAlignment alignment;
};

// Renders each token as a harmonic tone (partials weighted 1, 1/2, 1/4, ...)
// at its pitch and amplitude with phase carried across joints and a
// raised-cosine crossfade centered on each joint. Word i owns tokens
// [i*s, (i+1)*s).
Utterance decode_tokens(std::span<const Token> z, std::span<const std::string> words,
                        const ToyVoiceConfig& cfg = {},
                        const TokenCodebook& codebook = {});

// Everything a predictor may look at. `words` are the word features of
// `wave` under `alignment`; real models are free to ignore them.
struct UtteranceView {
  const Waveform& wave;
  const WordAlignment& alignment;
  std::span<const WordProsody> words;
};

struct EmotionPrediction {
  Emotion emotion = Emotion::kNeutral;
  double confidence = 0.0;
};

class EmotionClassifier {
 public:
  virtual ~EmotionClassifier() = default;
  virtual EmotionPrediction classify(const UtteranceView& u) const = 0;
  // True for stand-in models whose outputs only mean something in the toy
  // environment.
  virtual bool surrogate() const = 0;
};

class VadPredictor {
 public:
  virtual ~VadPredictor() = default;
  virtual VadVector predict(const UtteranceView& u) const = 0;
  virtual bool surrogate() const = 0;
};

// Utterance position in the unit square: mean log-pitch over voiced words
// and mean energy over all words, each mapped linearly onto the codebook's
// range and clamped to [0, 1].
struct ProsodyPoint {
  double pitch = 0.0;
  double energy = 0.0;
};

class ToyProsodyMap {
 public:
  explicit ToyProsodyMap(const ToyVoiceConfig& voice = {}, const TokenCodebook& codebook = {});

  ProsodyPoint locate(std::span<const WordProsody> words) const;
  // Per-word versions of the two coordinates (not clamped).
  double normalized_pitch(double log_f0) const;
  double normalized_energy(double f_energy) const;
  // Frame energy of a steady unit-amplitude tone.
  double unit_energy() const { return unit_energy_; }

 private:
  double log_min_pitch_;
  double log_pitch_span_;
  double min_amplitude_;
  double amplitude_span_;
  double unit_energy_;
};

// v = clamp(mu_neu + (2(p - 1/2), 4(e - 1/2), 2(e - 1/2)), 1, 7).
class ToyVadPredictor : public VadPredictor {
 public:
  explicit ToyVadPredictor(ToyProsodyMap map = ToyProsodyMap()) : map_(map) {}
  VadVector predict(const UtteranceView& u) const override;
  VadVector at(const ProsodyPoint& p) const;
  bool surrogate() const override { return true; }

 private:
  ToyProsodyMap map_;
};

struct ToySerCentroids {
  // Indexed by emotion id; (pitch, energy) in the unit square.
  std::array<ProsodyPoint, kNumEmotions> points{{
      {0.50, 0.50},  // neutral
      {0.05, 0.95},  // angry: low pitch, high energy
      {0.95, 0.95},  // happy: high pitch, high energy
      {0.05, 0.05},  // sad: low pitch, low energy
      {0.95, 0.05},  // surprise: high pitch, low energy
  }};
  // Softmax temperature over negative squared distances for the confidence.
  double temperature = 0.05;
};

// Nearest centroid; ties go to the lowest emotion id.
class ToyEmotionClassifier : public EmotionClassifier {
 public:
  explicit ToyEmotionClassifier(ToyProsodyMap map = ToyProsodyMap(), ToySerCentroids c = {})
      : map_(map), centroids_(c) {}
  EmotionPrediction classify(const UtteranceView& u) const override;
  EmotionPrediction at(const ProsodyPoint& p) const;
  const ToySerCentroids& centroids() const { return centroids_; }
  bool surrogate() const override { return true; }

 private:
  ToyProsodyMap map_;
  ToySerCentroids centroids_;
};

// Convenience wrappers over the default toy configuration.
VadVector toy_vad(const Waveform& w, const WordAlignment& a);
EmotionPrediction toy_ser(const Waveform& w, const WordAlignment& a);

// Human-readable listing of the codebook, voice settings, prosody map and
// centroids.
void dump_environment(std::ostream& out, const ToyVoiceConfig& voice = {},
                      const TokenCodebook& codebook = {}, const ToySerCentroids& c = {});

}  // namespace prosodyrl
