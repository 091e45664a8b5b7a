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

#include "prosodyrl/corpus.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "prosodyrl/error.h"

namespace prosodyrl {

void write_corpus(std::ostream& out, std::span<const ControlPrompt> prompts) {
  for (const ControlPrompt& p : prompts) {
    nlohmann::ordered_json j;
    j["words"] = p.words;
    j["emotion"] = std::string(to_string(p.emotion));
    j["intensity"] = std::string(to_string(p.intensity));
    j["emphasis"] = p.emphasized_indices();
    out << j.dump() << '\n';
  }
}

void write_corpus(const std::filesystem::path& path, std::span<const ControlPrompt> prompts) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  write_corpus(out, prompts);
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

std::vector<ControlPrompt> read_corpus(std::istream& in) {
  std::vector<ControlPrompt> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fail = [&](const std::string& why) {
      return Error(ErrorKind::kInvalidInput, "corpus line " + std::to_string(lineno) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw fail("not valid JSON");
    }
    ControlPrompt p;
    try {
      p.words = j.at("words").get<std::vector<std::string>>();
      const auto e = parse_emotion(j.at("emotion").get<std::string>());
      const auto r = parse_intensity(j.at("intensity").get<std::string>());
      if (!e) throw fail("unknown emotion");
      if (!r) throw fail("unknown intensity");
      p.emotion = *e;
      p.intensity = *r;
      p.emphasis.assign(p.words.size(), false);
      for (int i : j.at("emphasis").get<std::vector<int>>()) {
        if (i < 0 || i >= static_cast<int>(p.words.size())) throw fail("emphasis index out of range");
        p.emphasis[i] = true;
      }
    } catch (const nlohmann::json::exception& ex) {
      throw fail(ex.what());
    }
    p.validate();
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ControlPrompt> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open corpus " + path.string());
  return read_corpus(in);
}

}  // namespace prosodyrl
