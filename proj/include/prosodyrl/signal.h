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

// Frame- and word-level prosodic features.
//
// Frames are 20 ms long with a 10 ms hop. Frame k covers samples
// [k*hop, k*hop + len) and its center is at k*hop + len/2; a frame belongs
// to a word iff that center lies in the word's [start, end) span.

#pragma once

#include <span>
#include <string>
#include <vector>

namespace prosodyrl {

inline constexpr double kFrameSeconds = 0.020;
inline constexpr double kHopSeconds = 0.010;
inline constexpr double kMinF0Hz = 50.0;
inline constexpr double kMaxF0Hz = 600.0;
inline constexpr double kVoicingThreshold = 0.5;
inline constexpr double kVoicingRmsFloor = 1e-4;

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  // Throws kInvalidInput unless non-empty, rate >= 8000 and all samples
  // finite.
  void validate() const;
};

struct WordSpan {
  std::string word;
  double start = 0.0;  // seconds
  double end = 0.0;
};

struct WordAlignment {
  std::vector<WordSpan> spans;

  // Throws kInvalidAlignment unless 0 <= start < end, spans are ordered and
  // non-overlapping, and every span ends within `duration` seconds.
  void validate(double duration) const;
};

struct FrameTrack {
  std::vector<double> values;
  double frame_hop = kHopSeconds;
  double frame_len = kFrameSeconds;
};

struct WordProsody {
  double f_pitch = 0.0;  // max natural-log F0 over voiced frames; 0 if !voiced
  double f_energy = 0.0;  // mean per-frame spectral L2 norm
  bool voiced = false;
};

struct SentenceStats {
  double mu_pitch = 0.0;
  double mu_energy = 0.0;
  double sd_pitch = 0.0;
  double sd_energy = 0.0;
};

// Geometry shared by every frame-level track of a waveform.
struct FrameGeometry {
  int frame_len = 0;  // samples
  int hop = 0;        // samples
  int count = 0;

  static FrameGeometry of(const Waveform& w);
  // Center of frame k in samples.
  double center(int k) const { return k * static_cast<double>(hop) + frame_len / 2.0; }
};

// Normalized cross-correlation pitch tracker. Each frame correlates its 20 ms
// window against the window shifted by every integer lag in the 50-600 Hz
// period range; the reported F0 is sample_rate / lag for the shortest lag
// whose local peak is within 10% of the best one. Frames with peak
// correlation below 0.5 or RMS below 1e-4 are unvoiced (0).
FrameTrack estimate_f0(const Waveform& w);

// Per-frame L2 norm of the one-sided magnitude spectrum of a periodic-Hann
// windowed frame.
FrameTrack stft_energy(const Waveform& w);

std::vector<WordProsody> word_features(const Waveform& w,
                                       const WordAlignment& a,
                                       const FrameTrack& f0,
                                       const FrameTrack& energy);

// Convenience: f0 + energy + word_features in one pass.
std::vector<WordProsody> analyze_words(const Waveform& w,
                                       const WordAlignment& a);

// Population statistics. Pitch statistics cover voiced words only.
SentenceStats sentence_stats(std::span<const WordProsody> feats);

}  // namespace prosodyrl
