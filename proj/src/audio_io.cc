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

#include "prosodyrl/audio_io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "prosodyrl/error.h"

namespace prosodyrl {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

[[noreturn]] void bad_wav(const std::filesystem::path& path, const std::string& why) {
  throw Error(ErrorKind::kIo, path.string() + ": " + why);
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad_wav(path, "cannot open");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    bad_wav(path, "not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) bad_wav(path, "truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) bad_wav(path, "short fmt chunk");
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
      if (format == kFormatExtensible && size >= 26) format = le16(chunk + 32);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos = body + size + (size & 1);
  }
  if (format == 0) bad_wav(path, "missing fmt chunk");
  if (data == nullptr) bad_wav(path, "missing data chunk");
  if (channels != 1) bad_wav(path, "expected mono audio, got " + std::to_string(channels) + " channels");

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  if (format == kFormatPcm && bits == 16) {
    w.samples.resize(data_size / 2);
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
      const auto v = static_cast<std::int16_t>(le16(data + 2 * i));
      w.samples[i] = v / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    w.samples.resize(data_size / 4);
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
      w.samples[i] = std::bit_cast<float>(le32(data + 4 * i));
    }
  } else {
    bad_wav(path, "unsupported encoding (format " + std::to_string(format) + ", " +
                      std::to_string(bits) + " bits)");
  }
  return w;
}

void write_wav(const std::filesystem::path& path, const Waveform& w, WavFormat format) {
  const bool pcm = format == WavFormat::kPcm16;
  const std::uint16_t bytes_per_sample = pcm ? 2 : 4;
  const auto data_size = static_cast<std::uint32_t>(w.samples.size() * bytes_per_sample);

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put32(out, 36 + data_size);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, pcm ? kFormatPcm : kFormatFloat);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(w.sample_rate));
  put32(out, static_cast<std::uint32_t>(w.sample_rate) * bytes_per_sample);
  put16(out, bytes_per_sample);
  put16(out, bytes_per_sample * 8);
  out += "data";
  put32(out, data_size);
  for (double s : w.samples) {
    if (pcm) {
      const double clamped = std::clamp(s, -1.0, 32767.0 / 32768.0);
      put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(clamped * 32768.0))));
    } else {
      put32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

WordAlignment parse_alignment(std::istream& in) {
  WordAlignment a;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw Error(ErrorKind::kInvalidAlignment,
                  "line " + std::to_string(lineno) + ": expected word<TAB>start<TAB>end");
    }
    WordSpan span;
    span.word = line.substr(0, t1);
    try {
      std::size_t used = 0;
      const std::string s = line.substr(t1 + 1, t2 - t1 - 1);
      const std::string e = line.substr(t2 + 1);
      span.start = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      span.end = std::stod(e, &used);
      if (used != e.size()) throw std::invalid_argument(e);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::kInvalidAlignment,
                  "line " + std::to_string(lineno) + ": malformed seconds");
    }
    a.spans.push_back(std::move(span));
  }
  return a;
}

WordAlignment read_alignment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return parse_alignment(in);
}

void write_alignment(std::ostream& out, const WordAlignment& a) {
  char buf[64];
  for (const WordSpan& s : a.spans) {
    std::snprintf(buf, sizeof buf, "\t%.6f\t%.6f\n", s.start, s.end);
    out << s.word << buf;
  }
}

void write_alignment(const std::filesystem::path& path, const WordAlignment& a) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  write_alignment(out, a);
}

}  // namespace prosodyrl
