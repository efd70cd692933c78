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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "infilter/error.hpp"

namespace infilter {

struct Clip {
  std::vector<std::int16_t> samples;  // mono PCM
  int sample_rate = 16000;
  std::string label;
  std::string source;
};

class WavError : public Error {
 public:
  enum class Reason { kOpen, kMalformed, kUnsupported, kEmpty };
  WavError(Reason reason, const std::string& path, const std::string& what)
      : Error(path + ": " + what), reason_(reason) {}
  Reason reason() const noexcept { return reason_; }
  const char* kind() const noexcept override { return "wav"; }

 private:
  Reason reason_;
};

/// RIFF/WAVE PCM 16-bit. Multi-channel input is averaged down to mono.
Clip read_wav(const std::string& path);
Clip decode_wav(std::span<const std::uint8_t> bytes, const std::string& name = "<memory>");

void write_wav(const std::string& path, const Clip& clip);
/// Interleaved multi-channel writer, mostly for tests and tools.
void write_wav(const std::string& path, std::span<const std::int16_t> interleaved, int channels, int sample_rate);
std::vector<std::uint8_t> encode_wav(std::span<const std::int16_t> interleaved, int channels, int sample_rate);

/// Linear interpolation onto the target grid; output length is
/// floor(n * target / source).
Clip resample_linear(const Clip& clip, int target_rate);

/// Drops leading and trailing windows whose RMS is more than |threshold_db|
/// below the clip peak. Never returns an empty clip.
Clip trim_silence(const Clip& clip, double threshold_db = -40.0, double window_ms = 20.0);

/// Non-overlapping length-W windows. A trailing partial window is kept
/// zero-padded when at least half full; a clip shorter than one window
/// always yields one padded window.
std::vector<std::vector<std::int16_t>> frame_fixed(const Clip& clip, std::size_t W);

/// Adds white Gaussian noise at the given SNR with a SplitMix64/Box-Muller
/// stream seeded by `seed`; saturates to 16 bits.
Clip add_awgn(const Clip& clip, double snr_db, std::uint64_t seed);

/// Mean square of the samples in LSB^2.
double signal_power(std::span<const std::int16_t> x);

}  // namespace infilter
