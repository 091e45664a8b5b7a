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

// WAV and word-alignment file I/O.

#pragma once

#include <filesystem>
#include <iosfwd>

#include "prosodyrl/signal.h"

namespace prosodyrl {

enum class WavFormat { kPcm16, kFloat32 };

// Reads a mono RIFF/WAVE file holding 16-bit PCM or 32-bit IEEE float.
Waveform read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const Waveform& w,
               WavFormat format = WavFormat::kFloat32);

// One span per line: word<TAB>start_seconds<TAB>end_seconds. Blank lines are
// skipped.
WordAlignment parse_alignment(std::istream& in);
WordAlignment read_alignment(const std::filesystem::path& path);
// Seconds are written with six fractional digits.
void write_alignment(std::ostream& out, const WordAlignment& a);
void write_alignment(const std::filesystem::path& path, const WordAlignment& a);

}  // namespace prosodyrl
