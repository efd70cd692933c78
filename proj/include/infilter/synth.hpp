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
#include <string>

#include "infilter/audio.hpp"

namespace infilter {

// Voiced-speech-like corpus laid out with FSDD file names. Each speaker has a
// pitch, a vocal-tract scale and a tilt; each digit has a two-vowel formant
// glide. Used when the real recordings are not on disk.
struct SynthConfig {
  int speakers = 4;
  int digits = 10;
  int per_digit = 10;
  int sample_rate = 8000;
  std::uint64_t seed = 1;
};

std::string synth_speaker_name(int speaker);
Clip synth_utterance(const SynthConfig& cfg, int speaker, int digit, int index);
/// Writes every clip into `dir`; returns the number of files.
int write_synth_corpus(const std::string& dir, const SynthConfig& cfg);

}  // namespace infilter
