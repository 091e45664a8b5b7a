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

// Task rewards: emotion category, VAD-distance intensity, word emphasis.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "prosodyrl/signal.h"

namespace prosodyrl {

enum class Emotion : int { kNeutral = 0, kAngry, kHappy, kSad, kSurprise };
inline constexpr int kNumEmotions = 5;

enum class Intensity : int { kWeak = 0, kMedium, kStrong };
inline constexpr int kNumIntensities = 3;

std::string_view to_string(Emotion e);
std::string_view to_string(Intensity r);
std::optional<Emotion> parse_emotion(std::string_view s);
std::optional<Intensity> parse_intensity(std::string_view s);
Emotion emotion_from_id(int id);      // throws kInvalidInput when out of range
Intensity intensity_from_id(int id);  // throws kInvalidInput when out of range

// Valence, arousal, dominance; each axis spans [1, 7].
struct VadVector {
  double valence = 0.0;
  double arousal = 0.0;
  double dominance = 0.0;

  void validate() const;
};

inline constexpr VadVector kNeutralCentroid{3.8494, 4.2614, 3.9072};

struct IntensityBins {
  double t1 = 1.2;
  double t2 = 2.4;
  std::array<double, 3> midpoints{0.6, 1.8, 3.0};
  std::array<double, 3> sigmas{0.4, 0.4, 0.4};

  void validate() const;
};

struct IntensityReward {
  double r_match = 0.0;
  double r_dist = 0.0;
  double r_int = 0.0;
};

struct WordEmphasis {
  double hard_pitch = 0.0;
  double hard_energy = 0.0;
  double soft_pitch = 0.0;
  double soft_energy = 0.0;

  double sum() const { return hard_pitch + hard_energy + soft_pitch + soft_energy; }
};

struct EmphasisReward {
  std::vector<WordEmphasis> per_word;  // one entry per emphasized word, in order
  double r_emp = 0.0;
};

enum class EmphasisAggregate { kMean, kSum };

struct EmphasisOptions {
  EmphasisAggregate aggregate = EmphasisAggregate::kMean;
  // A word attains the sentence maximum when it is within these tolerances
  // of it: absolute for log-pitch, relative for energy.
  double pitch_tie_tolerance = 1e-9;
  double energy_tie_tolerance = 0.02;
};

struct RewardWeights {
  double ser = 1.0;
  double intensity = 1.0;
  double emphasis = 1.0;
};

struct RewardBreakdown {
  double r_ser = 0.0;
  double d = 0.0;
  double r_match = 0.0;
  double r_dist = 0.0;
  double r_int = 0.0;
  std::vector<WordEmphasis> per_word_emphasis;
  double r_emp = 0.0;
  double total = 0.0;
};

double ser_reward(Emotion predicted, Emotion target);

double vad_distance(const VadVector& v);

Intensity bin_of(double d, const IntensityBins& bins = {});

IntensityReward intensity_reward(double d, Intensity target,
                                 const IntensityBins& bins = {});

// `emphasized` holds word indices into `feats`; it must be non-empty with
// every index in range.
EmphasisReward emphasis_reward(std::span<const WordProsody> feats,
                               std::span<const int> emphasized,
                               const SentenceStats& stats,
                               const EmphasisOptions& options = {});

// Weighted sum of the three task terms. The intensity components and
// per-word emphasis detail are copied in so the breakdown is self-contained.
RewardBreakdown composite_reward(double r_ser, double d, const IntensityReward& intensity,
                                 const EmphasisReward& emphasis,
                                 const RewardWeights& weights = {});
// Plain-number form of composite_reward.
RewardBreakdown composite_reward(double r_ser, double r_int, double r_emp,
                                 const RewardWeights& weights = {});

}  // namespace prosodyrl
