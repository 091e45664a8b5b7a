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

#include "prosodyrl/policy.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "prosodyrl/error.h"

namespace prosodyrl {
namespace {

constexpr int kCheckpointVersion = 1;
constexpr const char* kCheckpointMagic = "prosodyrl-policy";

// Small fixed-capacity scratch for one state; V is 64 in practice.
struct StepScratch {
  std::vector<double> logits;
  std::vector<double> probs;
  explicit StepScratch(int v) : logits(v), probs(v) {}
};

void compute_logits(const PolicyParams& p, const std::array<int, FeatureLayout::kActive>& rows,
                    std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (int f : rows) {
    const auto r = p.row(f);
    for (std::size_t v = 0; v < out.size(); ++v) out[v] += r[v];
  }
}

// Fills probs and returns log Z - max, i.e. log_softmax(v) = logit(v) - max - lse.
double softmax(std::span<const double> logits, std::span<double> probs, double* max_out) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t v = 0; v < logits.size(); ++v) {
    probs[v] = std::exp(logits[v] - m);
    z += probs[v];
  }
  for (double& x : probs) x /= z;
  *max_out = m;
  return std::log(z);
}

void check_sequence(const PolicyParams& p, const ControlPrompt& prompt, std::span<const Token> z) {
  const std::size_t expected = prompt.word_count() * p.layout().tokens_per_word;
  if (z.size() != expected) {
    throw Error(ErrorKind::kInvalidSequence,
                "expected " + std::to_string(expected) + " tokens, got " + std::to_string(z.size()));
  }
  for (Token t : z) {
    if (t < 0 || t >= p.vocab()) {
      throw Error(ErrorKind::kInvalidSequence, "token id out of range: " + std::to_string(t));
    }
  }
}

void add_to_rows(std::span<double> grad, int vocab,
                 const std::array<int, FeatureLayout::kActive>& rows, std::span<const double> g) {
  for (int f : rows) {
    double* dst = grad.data() + static_cast<std::size_t>(f) * vocab;
    for (int v = 0; v < vocab; ++v) dst[v] += g[v];
  }
}

}  // namespace

std::vector<int> ControlPrompt::emphasized_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < emphasis.size(); ++i) {
    if (emphasis[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

void ControlPrompt::validate() const {
  if (words.empty()) throw Error(ErrorKind::kInvalidInput, "prompt has no words");
  if (emphasis.size() != words.size()) {
    throw Error(ErrorKind::kInvalidInput, "emphasis mask length differs from word count");
  }
  emotion_from_id(static_cast<int>(emotion));
  intensity_from_id(static_cast<int>(intensity));
}

std::array<int, FeatureLayout::kActive> FeatureLayout::active(const ControlPrompt& prompt, int t,
                                                              int prev) const {
  const int word = t / tokens_per_word;
  return {emotion_offset() + static_cast<int>(prompt.emotion),
          intensity_offset() + static_cast<int>(prompt.intensity),
          flag_offset() + (prompt.emphasis[word] ? 1 : 0), prev_offset() + prev,
          position_offset() + t % tokens_per_word};
}

PolicyParams::PolicyParams(const FeatureLayout& layout)
    : layout_(layout), w_(static_cast<std::size_t>(layout.dim()) * layout.vocab, 0.0) {
  if (layout.vocab <= 1 || layout.tokens_per_word <= 0) {
    throw Error(ErrorKind::kInvalidConfig, "policy needs vocab > 1 and tokens_per_word > 0");
  }
}

void PolicyParams::validate() const {
  for (double x : w_) {
    if (!std::isfinite(x)) throw Error(ErrorKind::kNumericalOverflow, "non-finite policy weight");
  }
}

void next_token_probs(const PolicyParams& p, const ControlPrompt& prompt, int t, int prev,
                      std::span<double> out) {
  std::vector<double> logits(p.vocab());
  compute_logits(p, p.layout().active(prompt, t, prev), logits);
  double m;
  softmax(logits, out, &m);
}

std::vector<double> next_token_probs(const PolicyParams& p, const ControlPrompt& prompt, int t,
                                     int prev) {
  std::vector<double> out(p.vocab());
  next_token_probs(p, prompt, t, prev, out);
  return out;
}

double log_prob(const PolicyParams& p, const ControlPrompt& prompt, std::span<const Token> z) {
  check_sequence(p, prompt, z);
  StepScratch s(p.vocab());
  double total = 0.0;
  int prev = p.layout().bos();
  for (std::size_t t = 0; t < z.size(); ++t) {
    compute_logits(p, p.layout().active(prompt, static_cast<int>(t), prev), s.logits);
    double m;
    const double lse = softmax(s.logits, s.probs, &m);
    total += s.logits[z[t]] - m - lse;
    prev = z[t];
  }
  return total;
}

TokenSequence sample(const PolicyParams& p, const ControlPrompt& prompt, Rng& rng) {
  prompt.validate();
  const int steps = static_cast<int>(prompt.word_count()) * p.layout().tokens_per_word;
  StepScratch s(p.vocab());
  TokenSequence z;
  z.reserve(steps);
  int prev = p.layout().bos();
  for (int t = 0; t < steps; ++t) {
    compute_logits(p, p.layout().active(prompt, t, prev), s.logits);
    double m;
    softmax(s.logits, s.probs, &m);
    const double u = rng.uniform();
    double acc = 0.0;
    int pick = p.vocab() - 1;
    for (int v = 0; v < p.vocab(); ++v) {
      acc += s.probs[v];
      if (u < acc) {
        pick = v;
        break;
      }
    }
    // Rounding can leave acc slightly below 1; fall back to the last token
    // with non-zero mass.
    if (pick == p.vocab() - 1) {
      while (pick > 0 && s.probs[pick] == 0.0) --pick;
    }
    z.push_back(pick);
    prev = pick;
  }
  return z;
}

TokenSequence sample(const PolicyParams& p, const ControlPrompt& prompt, std::uint64_t seed) {
  Rng rng(seed);
  return sample(p, prompt, rng);
}

double accumulate_grad_log_prob(const PolicyParams& p, const ControlPrompt& prompt,
                                std::span<const Token> z, double scale,
                                std::span<double> grad) {
  check_sequence(p, prompt, z);
  if (grad.size() != p.size()) {
    throw Error(ErrorKind::kInvalidInput, "gradient buffer has the wrong size");
  }
  StepScratch s(p.vocab());
  double total = 0.0;
  int prev = p.layout().bos();
  for (std::size_t t = 0; t < z.size(); ++t) {
    const auto rows = p.layout().active(prompt, static_cast<int>(t), prev);
    compute_logits(p, rows, s.logits);
    double m;
    const double lse = softmax(s.logits, s.probs, &m);
    total += s.logits[z[t]] - m - lse;
    // d log softmax(z_t) / d logit_v = [v = z_t] - p_v
    for (int v = 0; v < p.vocab(); ++v) s.probs[v] *= -scale;
    s.probs[z[t]] += scale;
    add_to_rows(grad, p.vocab(), rows, s.probs);
    prev = z[t];
  }
  return total;
}

std::vector<double> grad_log_prob(const PolicyParams& p, const ControlPrompt& prompt,
                                  std::span<const Token> z) {
  std::vector<double> g(p.size(), 0.0);
  accumulate_grad_log_prob(p, prompt, z, 1.0, g);
  return g;
}

double accumulate_grad_kl(const PolicyParams& p, const PolicyParams& ref,
                          const ControlPrompt& prompt, std::span<const Token> z, double scale,
                          std::span<double> grad) {
  check_sequence(p, prompt, z);
  if (ref.layout().vocab != p.vocab() || ref.dim() != p.dim()) {
    throw Error(ErrorKind::kCheckpointMismatch, "reference policy has a different shape");
  }
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != p.size()) {
    throw Error(ErrorKind::kInvalidInput, "gradient buffer has the wrong size");
  }
  const int vocab = p.vocab();
  StepScratch s(vocab), r(vocab);
  std::vector<double> log_ratio(vocab);
  double total = 0.0;
  int prev = p.layout().bos();
  for (std::size_t t = 0; t < z.size(); ++t) {
    const auto rows = p.layout().active(prompt, static_cast<int>(t), prev);
    compute_logits(p, rows, s.logits);
    compute_logits(ref, rows, r.logits);
    double mp, mr;
    const double lse_p = softmax(s.logits, s.probs, &mp);
    const double lse_r = softmax(r.logits, r.probs, &mr);
    double kl = 0.0;
    for (int v = 0; v < vocab; ++v) {
      log_ratio[v] = (s.logits[v] - mp - lse_p) - (r.logits[v] - mr - lse_r);
      kl += s.probs[v] * log_ratio[v];
    }
    total += kl;
    if (want_grad) {
      // d KL / d logit_u = p_u (log p_u - log r_u - KL)
      for (int v = 0; v < vocab; ++v) s.probs[v] *= scale * (log_ratio[v] - kl);
      add_to_rows(grad, vocab, rows, s.probs);
    }
    prev = z[t];
  }
  return total;
}

double sequence_kl(const PolicyParams& p, const PolicyParams& ref, const ControlPrompt& prompt,
                   std::span<const Token> z) {
  return accumulate_grad_kl(p, ref, prompt, z, 0.0, {});
}

double kl_to_ref(const PolicyParams& p, const PolicySnapshot& ref, const ControlPrompt& prompt,
                 std::span<const TokenSequence> sequences) {
  if (sequences.empty()) return 0.0;
  double total = 0.0;
  for (const TokenSequence& z : sequences) total += sequence_kl(p, ref.params(), prompt, z);
  return total / static_cast<double>(sequences.size());
}

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& p,
                     std::uint64_t codebook_hash) {
  p.validate();
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  char buf[64];
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "vocab " << p.vocab() << '\n';
  out << "tokens_per_word " << p.layout().tokens_per_word << '\n';
  out << "features " << p.dim() << '\n';
  std::snprintf(buf, sizeof buf, "codebook_hash %016" PRIx64 "\n", codebook_hash);
  out << buf;
  for (double x : p.weights()) {
    std::snprintf(buf, sizeof buf, "%.17g\n", x);
    out << buf;
  }
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

PolicyParams load_checkpoint(const std::filesystem::path& path, std::uint64_t codebook_hash) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open checkpoint " + path.string());
  const auto bad = [&](const std::string& why) {
    return Error(ErrorKind::kIo, path.string() + ": " + why);
  };

  std::string magic, key;
  int version = 0, vocab = 0, tpw = 0, dim = 0;
  std::string hash_hex;
  if (!(in >> magic >> version) || magic != kCheckpointMagic) throw bad("not a policy checkpoint");
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::kCheckpointMismatch,
                path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  if (!(in >> key >> vocab) || key != "vocab") throw bad("missing vocab");
  if (!(in >> key >> tpw) || key != "tokens_per_word") throw bad("missing tokens_per_word");
  if (!(in >> key >> dim) || key != "features") throw bad("missing features");
  if (!(in >> key >> hash_hex) || key != "codebook_hash") throw bad("missing codebook_hash");

  std::uint64_t stored = 0;
  try {
    std::size_t used = 0;
    stored = std::stoull(hash_hex, &used, 16);
    if (used != hash_hex.size()) throw bad("malformed codebook_hash");
  } catch (const std::logic_error&) {
    throw bad("malformed codebook_hash");
  }
  if (stored != codebook_hash) {
    throw Error(ErrorKind::kCheckpointMismatch,
                path.string() + ": codebook hash " + hash_hex + " does not match this build");
  }
  if (vocab <= 1 || tpw <= 0) throw bad("invalid shape");

  PolicyParams p(FeatureLayout{vocab, tpw});
  if (p.dim() != dim) {
    throw Error(ErrorKind::kCheckpointMismatch, path.string() + ": feature dimension mismatch");
  }
  for (double& x : p.weights()) {
    std::string tok;
    if (!(in >> tok)) throw bad("truncated weight table");
    try {
      std::size_t used = 0;
      x = std::stod(tok, &used);
      if (used != tok.size()) throw bad("malformed weight");
    } catch (const std::logic_error&) {
      throw bad("malformed weight");
    }
  }
  std::string extra;
  if (in >> extra) throw bad("trailing data after weight table");
  p.validate();
  return p;
}

}  // namespace prosodyrl
