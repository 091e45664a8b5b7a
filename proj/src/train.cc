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

#include "prosodyrl/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "prosodyrl/error.h"
#include "prosodyrl/rng.h"

namespace prosodyrl {
namespace {

constexpr std::array<const char*, 48> kWordList = {
    "the",    "river",  "morning", "quiet",  "garden", "window", "never",  "bright",
    "stone",  "letter", "across",  "winter", "little", "market", "silver", "before",
    "yellow", "doctor", "travel",  "honest", "forest", "simple", "beneath", "candle",
    "summer", "follow", "island",  "orange", "return", "gentle", "harbor", "engine",
    "music",  "paper",  "behind",  "rocket", "listen", "mirror", "sudden", "valley",
    "coffee", "number", "open",    "rabbit", "thunder", "under", "wonder", "yes"};

constexpr double kMaxLogRatio = 30.0;

int clamp_level(int x) { return std::clamp(x, 0, TokenCodebook::kLevels - 1); }

ControlPrompt random_prompt(int words, Emotion c, Intensity r, Rng& rng) {
  ControlPrompt p;
  p.emotion = c;
  p.intensity = r;
  p.words.reserve(words);
  for (int i = 0; i < words; ++i) p.words.emplace_back(kWordList[rng.below(kWordList.size())]);
  // Partial Fisher-Yates for three distinct positions.
  std::vector<int> pos(words);
  std::iota(pos.begin(), pos.end(), 0);
  p.emphasis.assign(words, false);
  for (int i = 0; i < 3; ++i) {
    const int j = i + static_cast<int>(rng.below(words - i));
    std::swap(pos[i], pos[j]);
    p.emphasis[pos[i]] = true;
  }
  return p;
}

void add_scaled(std::span<double> dst, std::span<const double> src, double a) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
}

}  // namespace

void CategoryThresholds::validate() const {
  for (const auto& e : edges) {
    if (!(0.0 < e[0] && e[0] < e[1])) {
      throw Error(ErrorKind::kInvalidConfig, "category thresholds need 0 < t1 < t2");
    }
  }
}

Intensity label_intensity(const VadVector& v, Emotion c, const CategoryThresholds& thresholds) {
  const auto& e = thresholds.edges.at(static_cast<int>(c));
  const double d = vad_distance(v);
  if (d < e[0]) return Intensity::kWeak;
  if (d < e[1]) return Intensity::kMedium;
  return Intensity::kStrong;
}

std::vector<ControlPrompt> generate_corpus(int n, int words_per_sentence, std::uint64_t seed) {
  if (words_per_sentence < 3) {
    throw Error(ErrorKind::kInvalidConfig, "sentences need at least 3 words");
  }
  if (n < 0) throw Error(ErrorKind::kInvalidConfig, "corpus size must be >= 0");
  Rng rng(derive_seed(seed, "corpus"));
  std::vector<ControlPrompt> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto c = static_cast<Emotion>(rng.below(kNumEmotions));
    const auto r = static_cast<Intensity>(rng.below(kNumIntensities));
    out.push_back(random_prompt(words_per_sentence, c, r, rng));
  }
  return out;
}

ToyRewardEnv::ToyRewardEnv() {
  env_.ser = &ser_;
  env_.vad = &vad_;
}

ScoredSequence score_sequence(const RewardEnv& env, const ControlPrompt& prompt,
                              std::span<const Token> z) {
  if (env.ser == nullptr || env.vad == nullptr) {
    throw Error(ErrorKind::kInvalidConfig, "reward environment has no predictors");
  }
  const Utterance u = decode_tokens(z, prompt.words, env.voice, env.codebook);
  const std::vector<WordProsody> feats = analyze_words(u.wave, u.alignment);
  const UtteranceView view{u.wave, u.alignment, feats};

  ScoredSequence s;
  s.predicted = env.ser->classify(view).emotion;
  const VadVector v = env.vad->predict(view);
  const double d = vad_distance(v);
  s.bin = bin_of(d, env.bins);
  const IntensityReward ir = intensity_reward(d, prompt.intensity, env.bins);
  const std::vector<int> emphasized = prompt.emphasized_indices();
  const EmphasisReward er = emphasis_reward(feats, emphasized, sentence_stats(feats), env.emphasis);
  s.reward = composite_reward(ser_reward(s.predicted, prompt.emotion), d, ir, er, env.weights);

  double hard = 0.0;
  for (const WordEmphasis& w : er.per_word) hard += w.hard_pitch * w.hard_energy;
  s.hard_rate = hard / static_cast<double>(er.per_word.size());
  s.ser_correct = s.predicted == prompt.emotion;
  s.bin_correct = s.bin == prompt.intensity;
  return s;
}

TeacherPolicy TeacherPolicy::toy_default() {
  // Chosen against the toy maps so that every sentence of a cell lands in
  // the target classifier region and intensity bin with all emphasized
  // words at the sentence maximum. At 100 Hz the frame energy reads about
  // 8% high, so low-pitch cells keep pitch flat or raise energy with it.
  // Neutral strong cannot reach the global strong bin; it sits further out
  // than neutral medium, inside the neutral region.
  TeacherPolicy t;
  t.cells = {{
      {{{3, 3, 4, 4}, {3, 5, 4, 7}, {3, 6, 4, 7}}},  // neutral
      {{{0, 3, 0, 4}, {0, 5, 0, 6}, {0, 7, 0, 7}}},  // angry
      {{{6, 4, 7, 5}, {6, 5, 7, 6}, {7, 7, 7, 7}}},  // happy
      {{{0, 2, 1, 3}, {0, 1, 0, 2}, {0, 0, 0, 0}}},  // sad
      {{{6, 2, 7, 3}, {6, 1, 7, 2}, {7, 0, 7, 0}}},  // surprise
  }};
  t.noise = 0.05;
  return t;
}

TokenSequence TeacherPolicy::sample(const ControlPrompt& prompt, int tokens_per_word,
                                    Rng& rng) const {
  prompt.validate();
  const TeacherCell& cell =
      cells.at(static_cast<int>(prompt.emotion)).at(static_cast<int>(prompt.intensity));
  TokenSequence z;
  z.reserve(prompt.word_count() * tokens_per_word);
  for (std::size_t w = 0; w < prompt.word_count(); ++w) {
    const bool up = prompt.emphasis[w];
    const int pl = up ? cell.emphasized_pitch : cell.pitch;
    const int el = up ? cell.emphasized_energy : cell.energy;
    for (int t = 0; t < tokens_per_word; ++t) {
      int p = pl, e = el;
      if (noise > 0.0 && rng.uniform() < noise) {
        const int step = rng.below(2) == 0 ? -1 : 1;
        if (rng.below(2) == 0) {
          p = clamp_level(p + step);
        } else {
          e = clamp_level(e + step);
        }
      }
      z.push_back(TokenCodebook::token(p, e));
    }
  }
  return z;
}

std::vector<LabeledExample> make_sft_examples(std::span<const ControlPrompt> prompts,
                                              const TeacherPolicy& teacher, const RewardEnv& env,
                                              std::uint64_t seed,
                                              const CategoryThresholds& thresholds) {
  thresholds.validate();
  if (env.vad == nullptr) throw Error(ErrorKind::kInvalidConfig, "labeling needs a VAD predictor");
  std::vector<LabeledExample> out;
  out.reserve(prompts.size());
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    Rng rng(derive_seed(seed, "teacher", i));
    LabeledExample ex{prompts[i], teacher.sample(prompts[i], env.voice.tokens_per_word, rng)};
    const Utterance u = decode_tokens(ex.z, ex.prompt.words, env.voice, env.codebook);
    const std::vector<WordProsody> feats = analyze_words(u.wave, u.alignment);
    const VadVector v = env.vad->predict({u.wave, u.alignment, feats});
    ex.prompt.intensity = label_intensity(v, ex.prompt.emotion, thresholds);
    out.push_back(std::move(ex));
  }
  return out;
}

double mean_token_nll(const PolicyParams& p, std::span<const LabeledExample> data) {
  double nll = 0.0;
  std::size_t tokens = 0;
  for (const LabeledExample& ex : data) {
    nll -= log_prob(p, ex.prompt, ex.z);
    tokens += ex.z.size();
  }
  return tokens == 0 ? 0.0 : nll / static_cast<double>(tokens);
}

SftResult sft_train(PolicyParams params, std::span<const LabeledExample> data,
                    const SftConfig& cfg) {
  if (data.empty()) throw Error(ErrorKind::kInvalidInput, "empty supervised corpus");
  if (cfg.epochs < 0 || !(cfg.learning_rate >= 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "epochs must be >= 0 and learning rate >= 0");
  }
  std::size_t tokens = 0;
  for (const LabeledExample& ex : data) tokens += ex.z.size();
  const double inv = 1.0 / static_cast<double>(tokens);

  SftResult out{std::move(params), {}, 0.0};
  std::vector<double> grad(out.params.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double ll = 0.0;
    for (const LabeledExample& ex : data) {
      ll += accumulate_grad_log_prob(out.params, ex.prompt, ex.z, inv, grad);
    }
    out.loss_curve.push_back(-ll * inv);
    // Ascent on the mean log-likelihood.
    add_scaled(out.params.weights(), grad, cfg.learning_rate);
  }
  out.params.validate();
  out.final_loss = mean_token_nll(out.params, data);
  return out;
}

std::vector<double> compute_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) throw Error(ErrorKind::kInvalidGroup, "a group needs at least 2 rewards");
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(rewards.size());
  std::vector<double> a(rewards.size());
  for (std::size_t k = 0; k < rewards.size(); ++k) a[k] = rewards[k] - mean;
  return a;
}

void GroupSample::validate() const {
  const std::size_t k = candidates.size();
  if (k < 2) throw Error(ErrorKind::kInvalidGroup, "a group needs at least 2 candidates");
  if (rewards.size() != k || advantages.size() != k || log_probs.size() != k ||
      ref_log_probs.size() != k) {
    throw Error(ErrorKind::kInvalidGroup, "group fields have inconsistent sizes");
  }
}

GrpoLoss grpo_loss(const PolicyParams& p, const PolicySnapshot& ref, const GroupSample& group,
                   double epsilon, double beta, RatioReference ratio) {
  group.validate();
  const std::size_t k_count = group.candidates.size();
  const double inv_k = 1.0 / static_cast<double>(k_count);

  GrpoLoss out;
  out.gradient.assign(p.size(), 0.0);
  for (std::size_t k = 0; k < k_count; ++k) {
    const TokenSequence& z = group.candidates[k];
    const double a = group.advantages[k];
    const double lp = log_prob(p, group.prompt, z);
    const double denom = ratio == RatioReference::kSft ? group.ref_log_probs[k] : group.log_probs[k];
    const double raw = lp - denom;
    const double rho = std::exp(std::clamp(raw, -kMaxLogRatio, kMaxLogRatio));
    if (!std::isfinite(rho) || !std::isfinite(a)) {
      throw Error(ErrorKind::kNumericalOverflow, "non-finite probability ratio or advantage");
    }
    const double unclipped = rho * a;
    const double clipped = std::clamp(rho, 1.0 - epsilon, 1.0 + epsilon) * a;
    out.surrogate += std::min(unclipped, clipped) * inv_k;
    if (unclipped <= clipped) {
      // d(rho A)/dW = rho A d log pi / dW; flat where the log-ratio clamp binds.
      if (std::abs(raw) <= kMaxLogRatio) {
        accumulate_grad_log_prob(p, group.prompt, z, -unclipped * inv_k, out.gradient);
      }
    } else {
      ++out.clipped;
    }
    if (beta != 0.0) {
      out.kl += accumulate_grad_kl(p, ref.params(), group.prompt, z, beta * inv_k, out.gradient) *
                inv_k;
    } else {
      out.kl += sequence_kl(p, ref.params(), group.prompt, z) * inv_k;
    }
  }
  out.loss = -out.surrogate + beta * out.kl;
  return out;
}

void GrpoConfig::validate() const {
  if (group_size < 2) throw Error(ErrorKind::kInvalidConfig, "group size K must be >= 2");
  if (!(beta >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "beta must be >= 0");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::kInvalidConfig, "epsilon must be > 0");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::kInvalidConfig, "learning rate must be > 0");
  if (steps < 0) throw Error(ErrorKind::kInvalidConfig, "steps must be >= 0");
}

void write_step_record(std::ostream& out, const StepRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["mean_reward"] = r.mean_reward;
  j["mean_r_ser"] = r.mean_r_ser;
  j["mean_r_int"] = r.mean_r_int;
  j["mean_r_emp"] = r.mean_r_emp;
  j["kl"] = r.kl;
  j["loss"] = r.loss;
  j["ser_accuracy"] = r.ser_accuracy;
  j["intensity_accuracy"] = r.intensity_accuracy;
  j["emphasis_hard_rate"] = r.emphasis_hard_rate;
  j["clipped"] = r.clipped;
  out << j.dump() << '\n';
}

GrpoResult grpo_train(const GrpoConfig& cfg, const PolicyParams& sft, const RewardEnv& env,
                      std::span<const ControlPrompt> corpus, const StepSink& sink) {
  cfg.validate();
  if (corpus.empty()) throw Error(ErrorKind::kInvalidInput, "GRPO needs a non-empty corpus");
  const PolicySnapshot ref(sft);
  GrpoResult out{sft, {}};
  PolicyParams& params = out.params;
  Rng prompts(derive_seed(cfg.seed, "grpo.prompts"));
  const int k_count = cfg.group_size;

  for (int step = 0; step < cfg.steps; ++step) {
    GroupSample g;
    g.prompt = corpus[prompts.below(corpus.size())];
    StepRecord rec;
    rec.step = step;
    for (int k = 0; k < k_count; ++k) {
      const std::uint64_t s =
          derive_seed(cfg.seed, "grpo.sample", static_cast<std::uint64_t>(step) * k_count + k);
      TokenSequence z = sample(params, g.prompt, s);
      const ScoredSequence sc = score_sequence(env, g.prompt, z);
      g.rewards.push_back(sc.reward.total);
      g.log_probs.push_back(log_prob(params, g.prompt, z));
      g.ref_log_probs.push_back(log_prob(ref.params(), g.prompt, z));
      g.candidates.push_back(std::move(z));
      rec.mean_r_ser += sc.reward.r_ser / k_count;
      rec.mean_r_int += sc.reward.r_int / k_count;
      rec.mean_r_emp += sc.reward.r_emp / k_count;
      rec.ser_accuracy += (sc.ser_correct ? 1.0 : 0.0) / k_count;
      rec.intensity_accuracy += (sc.bin_correct ? 1.0 : 0.0) / k_count;
      rec.emphasis_hard_rate += sc.hard_rate / k_count;
    }
    g.advantages = compute_advantages(g.rewards);
    const GrpoLoss l = grpo_loss(params, ref, g, cfg.epsilon, cfg.beta, cfg.ratio);
    if (!std::isfinite(l.loss)) {
      throw Error(ErrorKind::kNumericalOverflow, "non-finite GRPO loss at step " + std::to_string(step));
    }
    add_scaled(params.weights(), l.gradient, -cfg.learning_rate);

    for (double r : g.rewards) rec.mean_reward += r / k_count;
    rec.kl = l.kl;
    rec.loss = l.loss;
    rec.clipped = l.clipped;
    out.report.push_back(rec);
    if (sink) sink(rec);
  }
  params.validate();
  return out;
}

EvalReport evaluate(const PolicyParams& p, const RewardEnv& env, int per_cell, std::uint64_t seed,
                    int words_per_sentence) {
  if (per_cell <= 0) throw Error(ErrorKind::kInvalidConfig, "samples per cell must be > 0");
  if (words_per_sentence < 3) throw Error(ErrorKind::kInvalidConfig, "sentences need at least 3 words");
  EvalReport rep;
  for (int c = 0; c < kNumEmotions; ++c) {
    for (int r = 0; r < kNumIntensities; ++r) {
      CellMetrics m;
      m.emotion = static_cast<Emotion>(c);
      m.intensity = static_cast<Intensity>(r);
      m.samples = per_cell;
      const int cell = c * kNumIntensities + r;
      Rng prompts(derive_seed(seed, "eval.prompts", cell));
      double sum_d = 0.0, sum_d2 = 0.0;
      for (int i = 0; i < per_cell; ++i) {
        const ControlPrompt prompt = random_prompt(words_per_sentence, m.emotion, m.intensity, prompts);
        const TokenSequence z =
            sample(p, prompt, derive_seed(seed, "eval.sample", static_cast<std::uint64_t>(cell) * per_cell + i));
        const ScoredSequence s = score_sequence(env, prompt, z);
        m.ser_accuracy += s.ser_correct ? 1.0 : 0.0;
        m.intensity_accuracy += s.bin_correct ? 1.0 : 0.0;
        m.emphasis_hard_rate += s.hard_rate;
        sum_d += s.reward.d;
        sum_d2 += s.reward.d * s.reward.d;
      }
      const double n = per_cell;
      m.ser_accuracy /= n;
      m.intensity_accuracy /= n;
      m.emphasis_hard_rate /= n;
      m.mean_distance = sum_d / n;
      m.sd_distance = std::sqrt(std::max(0.0, sum_d2 / n - m.mean_distance * m.mean_distance));
      rep.ser_accuracy += m.ser_accuracy / static_cast<double>(kNumEmotions * kNumIntensities);
      rep.intensity_accuracy += m.intensity_accuracy / static_cast<double>(kNumEmotions * kNumIntensities);
      rep.emphasis_hard_rate += m.emphasis_hard_rate / static_cast<double>(kNumEmotions * kNumIntensities);
      rep.cells.push_back(m);
    }
  }
  return rep;
}

}  // namespace prosodyrl
