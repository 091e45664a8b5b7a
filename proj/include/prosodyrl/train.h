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

// Stage I (supervised fine-tuning on teacher data) and stage II (GRPO with
// a KL anchor to the supervised policy), plus corpus generation and
// evaluation.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "prosodyrl/env.h"
#include "prosodyrl/policy.h"
#include "prosodyrl/rewards.h"

namespace prosodyrl {

// Per-category (t1, t2) edges used when labeling supervised data. Neutral
// speech never strays far from the neutral centroid, so its edges are
// tighter.
struct CategoryThresholds {
  std::array<std::array<double, 2>, kNumEmotions> edges{{
      {0.8, 1.64}, {1.2, 2.4}, {1.2, 2.4}, {1.2, 2.4}, {1.2, 2.4}}};

  void validate() const;  // throws kInvalidConfig unless 0 < t1 < t2 per category
};

Intensity label_intensity(const VadVector& v, Emotion c, const CategoryThresholds& thresholds = {});

// Prompts with uniform emotion and intensity and exactly three distinct
// emphasized positions. Word labels are drawn from a fixed word list.
std::vector<ControlPrompt> generate_corpus(int n, int words_per_sentence, std::uint64_t seed);

struct LabeledExample {
  ControlPrompt prompt;
  TokenSequence z;
};

// Everything needed to turn tokens into rewards.
struct RewardEnv {
  ToyVoiceConfig voice;
  TokenCodebook codebook;
  const EmotionClassifier* ser = nullptr;
  const VadPredictor* vad = nullptr;
  IntensityBins bins;
  EmphasisOptions emphasis;
  RewardWeights weights;
};

// Owns default toy predictors and exposes them as a RewardEnv.
class ToyRewardEnv {
 public:
  ToyRewardEnv();
  const RewardEnv& env() const { return env_; }
  RewardEnv& env() { return env_; }

 private:
  ToyEmotionClassifier ser_;
  ToyVadPredictor vad_;
  RewardEnv env_;
};

struct ScoredSequence {
  RewardBreakdown reward;
  Emotion predicted = Emotion::kNeutral;
  Intensity bin = Intensity::kWeak;
  // Fraction of emphasized words with both hard terms equal to 1.
  double hard_rate = 0.0;
  bool ser_correct = false;
  bool bin_correct = false;
};

ScoredSequence score_sequence(const RewardEnv& env, const ControlPrompt& prompt,
                              std::span<const Token> z);

// Hand-built teacher. Each word is a run of one token: non-emphasized words
// use the cell's base levels, emphasized words its emphasis levels. Each
// token is independently moved to a neighbouring pitch or energy level with
// probability `noise`.
struct TeacherCell {
  int pitch = 0;  // codebook levels
  int energy = 0;
  int emphasized_pitch = 0;
  int emphasized_energy = 0;
};

struct TeacherPolicy {
  std::array<std::array<TeacherCell, kNumIntensities>, kNumEmotions> cells;
  double noise = 0.0;

  static TeacherPolicy toy_default();
  TokenSequence sample(const ControlPrompt& prompt, int tokens_per_word, Rng& rng) const;
};

// Draws one teacher sequence per prompt and relabels the intensity from the
// decoded audio with label_intensity, as emotion-annotated data would be.
std::vector<LabeledExample> make_sft_examples(std::span<const ControlPrompt> prompts,
                                              const TeacherPolicy& teacher, const RewardEnv& env,
                                              std::uint64_t seed,
                                              const CategoryThresholds& thresholds = {});

struct SftConfig {
  int epochs = 300;
  double learning_rate = 2.0;
};

struct SftResult {
  PolicyParams params;
  std::vector<double> loss_curve;  // mean NLL per token, before each epoch's update
  double final_loss = 0.0;         // after the last update
};

// Full-batch gradient descent on the mean per-token negative log-likelihood.
SftResult sft_train(PolicyParams params, std::span<const LabeledExample> data,
                    const SftConfig& cfg);

// Mean per-token negative log-likelihood.
double mean_token_nll(const PolicyParams& p, std::span<const LabeledExample> data);

// R - mean(R); throws kInvalidGroup for fewer than two rewards.
std::vector<double> compute_advantages(std::span<const double> rewards);

enum class RatioReference { kSft, kOld };

struct GroupSample {
  ControlPrompt prompt;
  std::vector<TokenSequence> candidates;
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> log_probs;      // under the policy that drew the group
  std::vector<double> ref_log_probs;  // under the reference snapshot

  void validate() const;  // throws kInvalidGroup
};

struct GrpoLoss {
  double loss = 0.0;
  double surrogate = 0.0;  // mean_k min(rho A, clip(rho) A)
  double kl = 0.0;         // mean sequence KL to the reference
  int clipped = 0;         // candidates whose clipped branch was active
  std::vector<double> gradient;  // d loss / dW
};

// loss = -surrogate + beta * kl. The ratio denominator is the reference
// log-prob (kSft) or the log-prob recorded when the group was drawn (kOld).
GrpoLoss grpo_loss(const PolicyParams& p, const PolicySnapshot& ref, const GroupSample& group,
                   double epsilon, double beta, RatioReference ratio = RatioReference::kSft);

// The ratio defaults to the sampling policy: anchored to the reference, the
// clip freezes most of each group within a few hundred steps at small
// learning rates and the policy collapses at larger ones.
struct GrpoConfig {
  int group_size = 16;
  double beta = 0.1;
  double epsilon = 0.2;
  double learning_rate = 0.1;
  int steps = 5000;
  std::uint64_t seed = 0;
  RatioReference ratio = RatioReference::kOld;

  void validate() const;  // throws kInvalidConfig
};

struct StepRecord {
  int step = 0;
  double mean_reward = 0.0;
  double mean_r_ser = 0.0;
  double mean_r_int = 0.0;
  double mean_r_emp = 0.0;
  double kl = 0.0;
  double loss = 0.0;
  double ser_accuracy = 0.0;
  double intensity_accuracy = 0.0;
  double emphasis_hard_rate = 0.0;
  int clipped = 0;
};

void write_step_record(std::ostream& out, const StepRecord& r);

struct GrpoResult {
  PolicyParams params;
  std::vector<StepRecord> report;
};

// Optional per-step callback, e.g. to stream the report to a file.
using StepSink = std::function<void(const StepRecord&)>;

GrpoResult grpo_train(const GrpoConfig& cfg, const PolicyParams& sft, const RewardEnv& env,
                      std::span<const ControlPrompt> corpus, const StepSink& sink = {});

struct CellMetrics {
  Emotion emotion = Emotion::kNeutral;
  Intensity intensity = Intensity::kWeak;
  int samples = 0;
  double ser_accuracy = 0.0;
  double intensity_accuracy = 0.0;
  double emphasis_hard_rate = 0.0;
  double mean_distance = 0.0;
  double sd_distance = 0.0;
};

struct EvalReport {
  std::vector<CellMetrics> cells;  // emotion-major, intensity-minor
  double ser_accuracy = 0.0;
  double intensity_accuracy = 0.0;
  double emphasis_hard_rate = 0.0;
};

// Samples `per_cell` fresh prompts for each of the 15 cells.
EvalReport evaluate(const PolicyParams& p, const RewardEnv& env, int per_cell, std::uint64_t seed,
                    int words_per_sentence = 8);

}  // namespace prosodyrl
