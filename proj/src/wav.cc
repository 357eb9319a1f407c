// digitvec/wav.cc

// Copyright 2026 The digitvec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "digitvec/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <vector>

#include "digitvec/error.h"

namespace digitvec {
namespace {

std::uint32_t ReadU32(const std::vector<unsigned char> &b, std::size_t pos) {
  return static_cast<std::uint32_t>(b[pos]) | (static_cast<std::uint32_t>(b[pos + 1]) << 8) |
         (static_cast<std::uint32_t>(b[pos + 2]) << 16) |
         (static_cast<std::uint32_t>(b[pos + 3]) << 24);
}

std::uint16_t ReadU16(const std::vector<unsigned char> &b, std::size_t pos) {
  return static_cast<std::uint16_t>(b[pos] | (b[pos + 1] << 8));
}

void PutU32(std::ostream &os, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::ostream &os, std::uint16_t v) {
  os.put(static_cast<char>(v & 0xff));
  os.put(static_cast<char>(v >> 8));
}

}  // namespace

AudioBuffer ReadWav(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::string(bytes.begin(), bytes.begin() + 4) != "RIFF" ||
      std::string(bytes.begin() + 8, bytes.begin() + 12) != "WAVE")
    throw IoError(path + " is not a RIFF/WAVE file");

  AudioBuffer audio;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::string id(bytes.begin() + pos, bytes.begin() + pos + 4);
    std::uint32_t size = ReadU32(bytes, pos + 4);
    std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw IoError(path + ": truncated chunk " + id);
    if (id == "fmt ") {
      if (size < 16) throw IoError(path + ": short fmt chunk");
      std::uint16_t format = ReadU16(bytes, body);
      std::uint16_t channels = ReadU16(bytes, body + 2);
      std::uint16_t bits = ReadU16(bytes, body + 14);
      if (format != 1 || channels != 1 || bits != 16)
        throw IoError(path + ": only mono 16-bit PCM is supported");
      audio.sample_rate = ReadU32(bytes, body + 4);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw IoError(path + ": data chunk before fmt chunk");
      audio.samples.resize(size / 2);
      for (std::size_t i = 0; i < audio.samples.size(); ++i)
        audio.samples[i] = static_cast<std::int16_t>(ReadU16(bytes, body + 2 * i));
      return audio;
    }
    pos = body + size + (size & 1);
  }
  throw IoError(path + ": no data chunk");
}

void WriteWav(const std::string &path, const AudioBuffer &audio) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  const auto rate = static_cast<std::uint32_t>(audio.sample_rate);
  os.write("RIFF", 4);
  PutU32(os, 36 + data_bytes);
  os.write("WAVEfmt ", 8);
  PutU32(os, 16);
  PutU16(os, 1);
  PutU16(os, 1);
  PutU32(os, rate);
  PutU32(os, rate * 2);
  PutU16(os, 2);
  PutU16(os, 16);
  os.write("data", 4);
  PutU32(os, data_bytes);
  for (double s : audio.samples) {
    auto v = static_cast<std::int16_t>(std::clamp(std::lround(s), -32768L, 32767L));
    PutU16(os, static_cast<std::uint16_t>(v));
  }
  if (!os) throw IoError("failed writing " + path);
}

}  // namespace digitvec
