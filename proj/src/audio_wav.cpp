// Copyright 2026 The infilter Authors.
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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "infilter/audio.hpp"

namespace infilter {

namespace {

std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

bool accepted_rate(std::uint32_t r) { return r == 8000 || r == 16000 || r == 44100; }

}  // namespace

Clip decode_wav(std::span<const std::uint8_t> bytes, const std::string& name) {
  using R = WavError::Reason;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw WavError(R::kMalformed, name, "not a RIFF/WAVE file");
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_len = 0;
  while (pos + 8 <= bytes.size()) {
    const auto* chunk = bytes.data() + pos;
    const std::uint32_t len = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) {
      // Tolerate a data chunk truncated by a writer that never patched sizes.
      if (std::memcmp(chunk, "data", 4) != 0) throw WavError(R::kMalformed, name, "chunk overruns file");
    }
    const std::size_t avail = std::min<std::size_t>(len, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw WavError(R::kMalformed, name, "short fmt chunk");
      std::uint16_t format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
      if (format == 0xFFFE && avail >= 26) format = le16(chunk + 8 + 24);  // extensible sub-format
      if (format != 1) throw WavError(R::kUnsupported, name, "codec " + std::to_string(format) + " is not PCM");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = avail;
    }
    pos = body + len + (len & 1u);
  }
  if (!have_fmt) throw WavError(R::kMalformed, name, "missing fmt chunk");
  if (data == nullptr) throw WavError(R::kMalformed, name, "missing data chunk");
  if (bits != 16) throw WavError(R::kUnsupported, name, std::to_string(bits) + "-bit samples (need 16)");
  if (channels < 1) throw WavError(R::kMalformed, name, "zero channels");
  if (!accepted_rate(rate)) throw WavError(R::kUnsupported, name, "sample rate " + std::to_string(rate));
  const std::size_t frames = data_len / (2u * channels);
  if (frames == 0) throw WavError(R::kEmpty, name, "no samples");

  Clip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.source = name;
  clip.samples.resize(frames);
  for (std::size_t n = 0; n < frames; ++n) {
    long sum = 0;
    for (std::size_t c = 0; c < channels; ++c) {
      sum += static_cast<std::int16_t>(le16(data + 2 * (n * channels + c)));
    }
    clip.samples[n] = static_cast<std::int16_t>(std::lround(static_cast<double>(sum) / channels));
  }
  return clip;
}

Clip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError(WavError::Reason::kOpen, path, "cannot open");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes, path);
}

std::vector<std::uint8_t> encode_wav(std::span<const std::int16_t> interleaved, int channels, int sample_rate) {
  if (channels < 1) throw InputError("encode_wav: channels must be >= 1");
  const auto data_len = static_cast<std::uint32_t>(interleaved.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, 1);
  put16(out, static_cast<std::uint16_t>(channels));
  put32(out, static_cast<std::uint32_t>(sample_rate));
  put32(out, static_cast<std::uint32_t>(sample_rate * channels * 2));
  put16(out, static_cast<std::uint16_t>(channels * 2));
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, data_len);
  for (auto s : interleaved) put16(out, static_cast<std::uint16_t>(s));
  return out;
}

void write_wav(const std::string& path, std::span<const std::int16_t> interleaved, int channels, int sample_rate) {
  const auto bytes = encode_wav(interleaved, channels, sample_rate);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path, "write failed");
}

void write_wav(const std::string& path, const Clip& clip) { write_wav(path, clip.samples, 1, clip.sample_rate); }

}  // namespace infilter
