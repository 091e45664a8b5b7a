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

#include "prosodyrl/error.h"

namespace prosodyrl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid input";
    case ErrorKind::kInvalidAlignment: return "invalid alignment";
    case ErrorKind::kNoVoicedContent: return "no voiced content";
    case ErrorKind::kDegenerateSentence: return "degenerate sentence";
    case ErrorKind::kInvalidSequence: return "invalid sequence";
    case ErrorKind::kInvalidGroup: return "invalid group";
    case ErrorKind::kNumericalOverflow: return "numerical overflow";
    case ErrorKind::kInvalidConfig: return "invalid config";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kCheckpointMismatch: return "checkpoint mismatch";
  }
  return "error";
}

}  // namespace prosodyrl
