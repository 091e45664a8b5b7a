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

// Autoregressive categorical policy over speech tokens. Logits are linear in
// a sparse one-hot feature vector, so each step touches five weight rows.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "prosodyrl/env.h"
#include "prosodyrl/rewards.h"
#include "prosodyrl/rng.h"

namespace prosodyrl {

struct ControlPrompt {
  std::vector<std::string> words;
  Emotion emotion = Emotion::kNeutral;
  Intensity intensity = Intensity::kWeak;
  std::vector<bool> emphasis;  // one flag per word

  std::size_t word_count() const { return words.size(); }
  std::vector<int> emphasized_indices() const;
  void validate() const;  // throws kInvalidInput
};

// Feature blocks, in order: emotion (5), intensity (3), emphasized flag (2),
// previous token (V + 1, the last slot is begin-of-sequence), position in
// word (s).
struct FeatureLayout {
  int vocab = 64;
  int tokens_per_word = 4;

  static constexpr int kActive = 5;

  int emotion_offset() const { return 0; }
  int intensity_offset() const { return kNumEmotions; }
  int flag_offset() const { return intensity_offset() + kNumIntensities; }
  int prev_offset() const { return flag_offset() + 2; }
  int bos() const { return vocab; }
  int position_offset() const { return prev_offset() + vocab + 1; }
  int dim() const { return position_offset() + tokens_per_word; }

  std::array<int, kActive> active(const ControlPrompt& prompt, int t, int prev) const;
};

// Weight table of dim() rows by vocab columns; the logit of token v at a
// state is the sum of column v over the active rows.
class PolicyParams {
 public:
  PolicyParams() : PolicyParams(FeatureLayout{}) {}
  explicit PolicyParams(const FeatureLayout& layout);

  const FeatureLayout& layout() const { return layout_; }
  int vocab() const { return layout_.vocab; }
  int dim() const { return layout_.dim(); }
  std::size_t size() const { return w_.size(); }

  std::span<double> row(int feature) { return {w_.data() + static_cast<std::size_t>(feature) * vocab(), static_cast<std::size_t>(vocab())}; }
  std::span<const double> row(int feature) const { return {w_.data() + static_cast<std::size_t>(feature) * vocab(), static_cast<std::size_t>(vocab())}; }
  std::vector<double>& weights() { return w_; }
  const std::vector<double>& weights() const { return w_; }

  void validate() const;  // finite weights

 private:
  FeatureLayout layout_;
  std::vector<double> w_;
};

// Frozen copy; the reference anchor during GRPO.
class PolicySnapshot {
 public:
  explicit PolicySnapshot(const PolicyParams& p) : p_(std::make_shared<const PolicyParams>(p)) {}
  const PolicyParams& params() const { return *p_; }

 private:
  std::shared_ptr<const PolicyParams> p_;
};

// Next-token distribution at step t after `prev` (layout.bos() at t = 0).
void next_token_probs(const PolicyParams& p, const ControlPrompt& prompt, int t, int prev,
                      std::span<double> out);
std::vector<double> next_token_probs(const PolicyParams& p, const ControlPrompt& prompt, int t,
                                     int prev);

double log_prob(const PolicyParams& p, const ControlPrompt& prompt, std::span<const Token> z);

TokenSequence sample(const PolicyParams& p, const ControlPrompt& prompt, Rng& rng);
TokenSequence sample(const PolicyParams& p, const ControlPrompt& prompt, std::uint64_t seed);

// Gradient of log_prob with respect to every weight, same layout as
// PolicyParams::weights().
std::vector<double> grad_log_prob(const PolicyParams& p, const ControlPrompt& prompt,
                                  std::span<const Token> z);
// grad += scale * d log_prob / dW; returns log_prob.
double accumulate_grad_log_prob(const PolicyParams& p, const ControlPrompt& prompt,
                                std::span<const Token> z, double scale,
                                std::span<double> grad);

// Sum over the prefixes of z of the exact KL(p || ref) between next-token
// distributions.
double sequence_kl(const PolicyParams& p, const PolicyParams& ref, const ControlPrompt& prompt,
                   std::span<const Token> z);
// grad += scale * d sequence_kl / dW with the visited prefixes held fixed;
// returns sequence_kl.
double accumulate_grad_kl(const PolicyParams& p, const PolicyParams& ref,
                          const ControlPrompt& prompt, std::span<const Token> z, double scale,
                          std::span<double> grad);

// Mean of sequence_kl over `sequences`.
double kl_to_ref(const PolicyParams& p, const PolicySnapshot& ref, const ControlPrompt& prompt,
                 std::span<const TokenSequence> sequences);

// Text checkpoint: a header with format version, vocab, tokens per word,
// feature dimension and codebook hash, then one weight per line.
void save_checkpoint(const std::filesystem::path& path, const PolicyParams& p,
                     std::uint64_t codebook_hash);
// Throws kIo on unreadable or malformed files and kCheckpointMismatch when
// the hash or shape disagrees with what the caller expects.
PolicyParams load_checkpoint(const std::filesystem::path& path, std::uint64_t codebook_hash);

}  // namespace prosodyrl
