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

// Corpus files: one JSON object per line,
//   {"words": [...], "emotion": "happy", "intensity": "weak", "emphasis": [0, 3, 5]}
// where "emphasis" lists emphasized word indices.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "prosodyrl/policy.h"

namespace prosodyrl {

void write_corpus(std::ostream& out, std::span<const ControlPrompt> prompts);
void write_corpus(const std::filesystem::path& path, std::span<const ControlPrompt> prompts);

// Throws kIo for unreadable files and kInvalidInput for malformed lines.
std::vector<ControlPrompt> read_corpus(std::istream& in);
std::vector<ControlPrompt> read_corpus(const std::filesystem::path& path);

}  // namespace prosodyrl
