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

#include "prosodyrl/signal.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "prosodyrl/error.h"

namespace prosodyrl {
namespace {

// Sub-sample slack when comparing frame centers against span edges, so that
// spans given in decimal seconds land on the intended side of a center.
constexpr double kEdgeSlack = 1e-6;

constexpr double kPeakFraction = 0.9;

template <typename T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwDeleter<double>>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwDeleter<fftw_complex>>;

RealBuffer alloc_real(int n) {
  return RealBuffer(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
}
ComplexBuffer alloc_complex(int n) {
  return ComplexBuffer(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

// Plans are created once per size under a lock; executing a plan on fresh
// fftw_malloc'd buffers through the new-array interface is thread-safe.
struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

const Plans& plans_for(int n) {
  static std::mutex mu;
  static std::map<int, Plans> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  RealBuffer r = alloc_real(n);
  ComplexBuffer c = alloc_complex(n / 2 + 1);
  Plans p;
  p.forward = fftw_plan_dft_r2c_1d(n, r.get(), c.get(), FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(n, c.get(), r.get(), FFTW_ESTIMATE);
  return cache.emplace(n, p).first->second;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

FrameGeometry checked_geometry(const Waveform& w) {
  w.validate();
  FrameGeometry g = FrameGeometry::of(w);
  if (g.count == 0) {
    throw Error(ErrorKind::kInvalidInput,
                "waveform shorter than one 20 ms frame");
  }
  return g;
}

}  // namespace

void Waveform::validate() const {
  if (samples.empty()) throw Error(ErrorKind::kInvalidInput, "empty waveform");
  if (sample_rate < 8000) {
    throw Error(ErrorKind::kInvalidInput,
                "sample rate below 8000 Hz: " + std::to_string(sample_rate));
  }
  for (double s : samples) {
    if (!std::isfinite(s)) {
      throw Error(ErrorKind::kInvalidInput, "non-finite sample");
    }
  }
}

void WordAlignment::validate(double duration) const {
  double prev_end = 0.0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const WordSpan& s = spans[i];
    const std::string where = "span " + std::to_string(i) + " ('" + s.word + "')";
    if (!(std::isfinite(s.start) && std::isfinite(s.end))) {
      throw Error(ErrorKind::kInvalidAlignment, where + " has non-finite bounds");
    }
    if (s.start < 0.0 || s.start >= s.end) {
      throw Error(ErrorKind::kInvalidAlignment, where + " needs 0 <= start < end");
    }
    if (s.start < prev_end) {
      throw Error(ErrorKind::kInvalidAlignment, where + " overlaps its predecessor");
    }
    if (s.end > duration + 1e-9) {
      throw Error(ErrorKind::kInvalidAlignment,
                  where + " ends after the audio (" + std::to_string(duration) + " s)");
    }
    prev_end = s.end;
  }
}

FrameGeometry FrameGeometry::of(const Waveform& w) {
  FrameGeometry g;
  g.frame_len = static_cast<int>(std::lround(kFrameSeconds * w.sample_rate));
  g.hop = static_cast<int>(std::lround(kHopSeconds * w.sample_rate));
  const auto total = static_cast<long>(w.samples.size());
  g.count = total < g.frame_len ? 0 : 1 + static_cast<int>((total - g.frame_len) / g.hop);
  return g;
}

FrameTrack estimate_f0(const Waveform& w) {
  const FrameGeometry g = checked_geometry(w);
  const int n = g.frame_len;
  const int min_lag = static_cast<int>(std::ceil(w.sample_rate / kMaxF0Hz));
  const int max_lag = static_cast<int>(std::floor(w.sample_rate / kMinF0Hz));
  const int fft_len = next_pow2(n + max_lag);
  const Plans& plans = plans_for(fft_len);

  RealBuffer frame = alloc_real(fft_len);
  RealBuffer segment = alloc_real(fft_len);
  RealBuffer corr = alloc_real(fft_len);
  ComplexBuffer frame_spec = alloc_complex(fft_len / 2 + 1);
  ComplexBuffer seg_spec = alloc_complex(fft_len / 2 + 1);
  std::vector<double> energy_prefix(n + max_lag + 1);
  std::vector<double> nccf(max_lag + 2);

  const auto total = static_cast<long>(w.samples.size());
  FrameTrack track;
  track.values.assign(g.count, 0.0);

  for (int k = 0; k < g.count; ++k) {
    const long start = static_cast<long>(k) * g.hop;
    const int avail = static_cast<int>(std::min<long>(max_lag, total - start - n));
    if (avail < min_lag) continue;

    const double* x = w.samples.data() + start;
    double frame_energy = 0.0;
    for (int i = 0; i < n; ++i) frame_energy += x[i] * x[i];
    if (std::sqrt(frame_energy / n) < kVoicingRmsFloor) continue;

    const int seg_len = n + avail;
    std::fill(frame.get(), frame.get() + fft_len, 0.0);
    std::fill(segment.get(), segment.get() + fft_len, 0.0);
    std::copy(x, x + n, frame.get());
    std::copy(x, x + seg_len, segment.get());
    energy_prefix[0] = 0.0;
    for (int i = 0; i < seg_len; ++i) {
      energy_prefix[i + 1] = energy_prefix[i] + x[i] * x[i];
    }

    fftw_execute_dft_r2c(plans.forward, frame.get(), frame_spec.get());
    fftw_execute_dft_r2c(plans.forward, segment.get(), seg_spec.get());
    for (int b = 0; b <= fft_len / 2; ++b) {
      // conj(F) * S
      const double fr = frame_spec[b][0], fi = frame_spec[b][1];
      const double sr = seg_spec[b][0], si = seg_spec[b][1];
      seg_spec[b][0] = fr * sr + fi * si;
      seg_spec[b][1] = fr * si - fi * sr;
    }
    fftw_execute_dft_c2r(plans.inverse, seg_spec.get(), corr.get());

    const int lo = min_lag - 1;
    const int hi = std::min(avail + 1, seg_len - n);
    double best = -1.0;
    for (int lag = lo; lag <= hi; ++lag) {
      const double shifted = energy_prefix[lag + n] - energy_prefix[lag];
      const double denom = std::sqrt(frame_energy * shifted);
      nccf[lag] = denom > 0.0 ? corr[lag] / fft_len / denom : 0.0;
      if (lag >= min_lag && lag <= avail) best = std::max(best, nccf[lag]);
    }
    if (best < kVoicingThreshold) continue;

    for (int lag = min_lag; lag <= avail; ++lag) {
      const double r = nccf[lag];
      if (r < kPeakFraction * best) continue;
      const bool left_ok = r >= nccf[lag - 1];
      const bool right_ok = lag + 1 > hi || r >= nccf[lag + 1];
      if (left_ok && right_ok) {
        track.values[k] = static_cast<double>(w.sample_rate) / lag;
        break;
      }
    }
  }
  return track;
}

FrameTrack stft_energy(const Waveform& w) {
  const FrameGeometry g = checked_geometry(w);
  const int n = g.frame_len;
  const Plans& plans = plans_for(n);
  RealBuffer frame = alloc_real(n);
  ComplexBuffer spec = alloc_complex(n / 2 + 1);

  std::vector<double> window(n);
  for (int i = 0; i < n; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  }

  FrameTrack track;
  track.values.resize(g.count);
  for (int k = 0; k < g.count; ++k) {
    const double* x = w.samples.data() + static_cast<long>(k) * g.hop;
    for (int i = 0; i < n; ++i) frame[i] = x[i] * window[i];
    fftw_execute_dft_r2c(plans.forward, frame.get(), spec.get());
    double sum = 0.0;
    for (int b = 0; b <= n / 2; ++b) {
      sum += spec[b][0] * spec[b][0] + spec[b][1] * spec[b][1];
    }
    track.values[k] = std::sqrt(sum);
  }
  return track;
}

std::vector<WordProsody> word_features(const Waveform& w,
                                       const WordAlignment& a,
                                       const FrameTrack& f0,
                                       const FrameTrack& energy) {
  const FrameGeometry g = checked_geometry(w);
  if (static_cast<int>(f0.values.size()) != g.count ||
      static_cast<int>(energy.values.size()) != g.count) {
    throw Error(ErrorKind::kInvalidInput,
                "frame tracks do not match the waveform's frame count");
  }
  a.validate(w.duration());

  std::vector<WordProsody> out;
  out.reserve(a.spans.size());
  const double half = g.frame_len / 2.0;
  for (const WordSpan& span : a.spans) {
    const double lo = span.start * w.sample_rate - kEdgeSlack;
    const double hi = span.end * w.sample_rate - kEdgeSlack;
    const int first = std::max(0, static_cast<int>(std::ceil((lo - half) / g.hop)));
    const int last = std::min(g.count - 1, static_cast<int>(std::ceil((hi - half) / g.hop)) - 1);
    if (first > last) {
      throw Error(ErrorKind::kInvalidAlignment,
                  "span '" + span.word + "' contains no frame center");
    }
    WordProsody p;
    double energy_sum = 0.0;
    for (int k = first; k <= last; ++k) {
      energy_sum += energy.values[k];
      const double hz = f0.values[k];
      if (hz > 0.0) {
        const double lp = std::log(hz);
        p.f_pitch = p.voiced ? std::max(p.f_pitch, lp) : lp;
        p.voiced = true;
      }
    }
    p.f_energy = energy_sum / (last - first + 1);
    out.push_back(p);
  }
  return out;
}

std::vector<WordProsody> analyze_words(const Waveform& w, const WordAlignment& a) {
  a.validate(w.duration());
  return word_features(w, a, estimate_f0(w), stft_energy(w));
}

SentenceStats sentence_stats(std::span<const WordProsody> feats) {
  if (feats.empty()) {
    throw Error(ErrorKind::kInvalidInput, "sentence has no words");
  }
  double pitch_sum = 0.0, energy_sum = 0.0;
  int voiced = 0;
  for (const WordProsody& f : feats) {
    energy_sum += f.f_energy;
    if (f.voiced) {
      pitch_sum += f.f_pitch;
      ++voiced;
    }
  }
  if (voiced == 0) {
    throw Error(ErrorKind::kNoVoicedContent, "sentence has no voiced word");
  }
  SentenceStats s;
  s.mu_pitch = pitch_sum / voiced;
  s.mu_energy = energy_sum / static_cast<double>(feats.size());
  double pv = 0.0, ev = 0.0;
  for (const WordProsody& f : feats) {
    ev += (f.f_energy - s.mu_energy) * (f.f_energy - s.mu_energy);
    if (f.voiced) pv += (f.f_pitch - s.mu_pitch) * (f.f_pitch - s.mu_pitch);
  }
  s.sd_pitch = std::sqrt(pv / voiced);
  s.sd_energy = std::sqrt(ev / static_cast<double>(feats.size()));
  return s;
}

}  // namespace prosodyrl
