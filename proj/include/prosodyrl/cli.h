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

// Command-line front end. Exit codes: 0 success, 1 runtime or data error,
// 2 usage or validation error.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "prosodyrl/env.h"
#include "prosodyrl/rewards.h"
#include "prosodyrl/train.h"

namespace prosodyrl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::uint64_t seed = 0;
  int corpus_size = 1000;
  int words_per_sentence = 8;
  SftConfig sft;
  double teacher_noise = 0.05;
  GrpoConfig grpo;
  IntensityBins bins;
  RewardWeights weights;
  EmphasisAggregate emphasis_aggregate = EmphasisAggregate::kMean;
  ToyVoiceConfig voice;
  int eval_per_cell = 50;

  std::filesystem::path corpus;
  std::filesystem::path init;
  std::filesystem::path out;
  std::filesystem::path log;
};

// Bins with the default midpoint rule for arbitrary edges: t1/2, (t1+t2)/2
// and t2 + (t2-t1)/2.
IntensityBins bins_from_edges(double t1, double t2, double sigma = 0.4);

// args[0] is the program name. Usage text and diagnostics go to `err`,
// results to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace prosodyrl
