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

#include "prosodyrl/rewards.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "prosodyrl/error.h"

namespace prosodyrl {
namespace {

constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "neutral", "angry", "happy", "sad", "surprise"};
constexpr std::array<std::string_view, kNumIntensities> kIntensityNames = {
    "weak", "medium", "strong"};

double clip_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

std::string_view to_string(Emotion e) { return kEmotionNames.at(static_cast<int>(e)); }
std::string_view to_string(Intensity r) { return kIntensityNames.at(static_cast<int>(r)); }

std::optional<Emotion> parse_emotion(std::string_view s) {
  for (int i = 0; i < kNumEmotions; ++i) {
    if (kEmotionNames[i] == s) return static_cast<Emotion>(i);
  }
  return std::nullopt;
}

std::optional<Intensity> parse_intensity(std::string_view s) {
  for (int i = 0; i < kNumIntensities; ++i) {
    if (kIntensityNames[i] == s) return static_cast<Intensity>(i);
  }
  return std::nullopt;
}

Emotion emotion_from_id(int id) {
  if (id < 0 || id >= kNumEmotions) {
    throw Error(ErrorKind::kInvalidInput, "emotion id out of range: " + std::to_string(id));
  }
  return static_cast<Emotion>(id);
}

Intensity intensity_from_id(int id) {
  if (id < 0 || id >= kNumIntensities) {
    throw Error(ErrorKind::kInvalidInput, "intensity id out of range: " + std::to_string(id));
  }
  return static_cast<Intensity>(id);
}

void VadVector::validate() const {
  for (double x : {valence, arousal, dominance}) {
    if (!(x >= 1.0 && x <= 7.0)) {
      throw Error(ErrorKind::kInvalidInput, "VAD component outside [1, 7]");
    }
  }
}

void IntensityBins::validate() const {
  const auto& m = midpoints;
  const bool ordered = 0.0 < t1 && t1 < t2 && m[0] < t1 && t1 <= m[1] && m[1] < t2 && t2 <= m[2];
  if (!ordered) {
    throw Error(ErrorKind::kInvalidConfig,
                "intensity bins need 0 < t1 < t2 with m_weak < t1 <= m_medium < t2 <= m_strong");
  }
  for (double s : sigmas) {
    if (!(s > 0.0)) throw Error(ErrorKind::kInvalidConfig, "intensity sigmas must be > 0");
  }
}

double ser_reward(Emotion predicted, Emotion target) {
  return predicted == target ? 5.0 : -1.0;
}

double vad_distance(const VadVector& v) {
  const double dv = v.valence - kNeutralCentroid.valence;
  const double da = v.arousal - kNeutralCentroid.arousal;
  const double dd = v.dominance - kNeutralCentroid.dominance;
  return std::sqrt(dv * dv + da * da + dd * dd);
}

Intensity bin_of(double d, const IntensityBins& bins) {
  if (d < bins.t1) return Intensity::kWeak;
  if (d < bins.t2) return Intensity::kMedium;
  return Intensity::kStrong;
}

IntensityReward intensity_reward(double d, Intensity target, const IntensityBins& bins) {
  const int r = static_cast<int>(target);
  const double m = bins.midpoints[r];
  const double s = bins.sigmas[r];
  IntensityReward out;
  out.r_match = bin_of(d, bins) == target ? 1.0 : 0.0;
  out.r_dist = std::exp(-(d - m) * (d - m) / (2.0 * s * s));
  out.r_int = out.r_match + out.r_dist;
  return out;
}

EmphasisReward emphasis_reward(std::span<const WordProsody> feats,
                               std::span<const int> emphasized,
                               const SentenceStats& stats,
                               const EmphasisOptions& options) {
  if (emphasized.empty()) {
    throw Error(ErrorKind::kInvalidInput, "emphasis mask marks no word");
  }
  for (int w : emphasized) {
    if (w < 0 || w >= static_cast<int>(feats.size())) {
      throw Error(ErrorKind::kInvalidInput,
                  "emphasized word index out of range: " + std::to_string(w));
    }
  }
  if (!(stats.mu_energy > 0.0)) {
    throw Error(ErrorKind::kDegenerateSentence, "sentence mean energy is zero");
  }

  double max_pitch = -std::numeric_limits<double>::infinity();
  double max_energy = 0.0;
  for (const WordProsody& f : feats) {
    if (f.voiced) max_pitch = std::max(max_pitch, f.f_pitch);
    max_energy = std::max(max_energy, f.f_energy);
  }

  EmphasisReward out;
  double total = 0.0;
  for (int w : emphasized) {
    const WordProsody& f = feats[w];
    WordEmphasis e;
    if (f.voiced) {
      e.hard_pitch = f.f_pitch >= max_pitch - options.pitch_tie_tolerance ? 1.0 : 0.0;
      e.soft_pitch = clip_unit((f.f_pitch - stats.mu_pitch) / stats.mu_pitch);
    } else {
      e.hard_pitch = 0.0;
      e.soft_pitch = -1.0;
    }
    e.hard_energy = f.f_energy >= max_energy * (1.0 - options.energy_tie_tolerance) ? 1.0 : 0.0;
    e.soft_energy = clip_unit((f.f_energy - stats.mu_energy) / stats.mu_energy);
    total += e.sum();
    out.per_word.push_back(e);
  }
  out.r_emp = options.aggregate == EmphasisAggregate::kMean
                  ? total / static_cast<double>(emphasized.size())
                  : total;
  return out;
}

RewardBreakdown composite_reward(double r_ser, double d, const IntensityReward& intensity,
                                 const EmphasisReward& emphasis,
                                 const RewardWeights& weights) {
  RewardBreakdown b = composite_reward(r_ser, intensity.r_int, emphasis.r_emp, weights);
  b.d = d;
  b.r_match = intensity.r_match;
  b.r_dist = intensity.r_dist;
  b.per_word_emphasis = emphasis.per_word;
  return b;
}

RewardBreakdown composite_reward(double r_ser, double r_int, double r_emp,
                                 const RewardWeights& weights) {
  RewardBreakdown b;
  b.r_ser = r_ser;
  b.r_int = r_int;
  b.r_emp = r_emp;
  b.total = weights.ser * r_ser + weights.intensity * r_int + weights.emphasis * r_emp;
  return b;
}

}  // namespace prosodyrl
