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
#include <array>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "infilter/error.hpp"
#include "infilter/random.hpp"
#include "infilter/synth.hpp"

namespace infilter {

namespace {

struct Voice {
  double f0, tract, tilt;
};

// F1/F2/F3 pairs for the start and end vowel of each digit.
constexpr std::array<std::array<double, 6>, 10> kDigitFormants = {{
    {300, 2300, 3000, 700, 1200, 2500},
    {400, 800, 2400, 300, 2100, 2900},
    {350, 1000, 2300, 300, 900, 2300},
    {500, 1700, 2500, 300, 2300, 3000},
    {450, 900, 2400, 500, 1100, 2300},
    {700, 1200, 2500, 350, 2200, 2900},
    {550, 1800, 2500, 400, 2000, 2700},
    {550, 1700, 2500, 450, 1500, 2400},
    {600, 1900, 2600, 400, 2200, 2900},
    {650, 1200, 2500, 350, 2100, 2800},
}};

Voice voice_for(const SynthConfig& cfg, int speaker) {
  SplitMix64 g(derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(speaker)));
  const double t = cfg.speakers > 1 ? static_cast<double>(speaker) / (cfg.speakers - 1) : 0.5;
  return {95.0 + 130.0 * t + 10.0 * g.uniform(), 0.85 + 0.3 * g.uniform(), 0.6 + 0.35 * g.uniform()};
}

// Two-pole resonator run in place.
void resonate(std::vector<double>& x, const std::vector<double>& freq, double bw, int fs) {
  double y1 = 0.0, y2 = 0.0;
  const double r = std::exp(-std::numbers::pi * bw / fs);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double th = 2.0 * std::numbers::pi * freq[n] / fs;
    const double y = (1.0 - r) * x[n] + 2.0 * r * std::cos(th) * y1 - r * r * y2;
    y2 = y1;
    y1 = y;
    x[n] = y;
  }
}

}  // namespace

std::string synth_speaker_name(int speaker) {
  static const std::array<const char*, 8> kNames = {"ash", "birch", "cedar", "dogwood",
                                                    "elm", "fir",   "gum",   "hazel"};
  if (speaker >= 0 && speaker < static_cast<int>(kNames.size())) return kNames[static_cast<std::size_t>(speaker)];
  return "spk" + std::to_string(speaker);
}

Clip synth_utterance(const SynthConfig& cfg, int speaker, int digit, int index) {
  if (speaker < 0 || speaker >= cfg.speakers || digit < 0 || digit >= 10 || index < 0) {
    throw DomainError("synth_utterance: index out of range");
  }
  const int fs = cfg.sample_rate;
  const Voice v = voice_for(cfg, speaker);
  SplitMix64 g(derive_seed(cfg.seed, static_cast<std::uint64_t>((speaker * 10 + digit) * 100003 + index)));

  const double dur = 0.35 + 0.2 * g.uniform();
  const auto voiced = static_cast<std::size_t>(dur * fs);
  const auto lead = static_cast<std::size_t>((0.03 + 0.07 * g.uniform()) * fs);
  const auto tail = static_cast<std::size_t>((0.03 + 0.07 * g.uniform()) * fs);
  const double f0 = v.f0 * (1.0 + 0.04 * (g.uniform() - 0.5));
  const double tract = v.tract * (1.0 + 0.03 * (g.uniform() - 0.5));

  // glottal source: pulse train with jitter, leaky-integrated for spectral tilt
  std::vector<double> src(voiced, 0.0);
  double phase = 0.0, lp = 0.0;
  for (std::size_t n = 0; n < voiced; ++n) {
    const double t = static_cast<double>(n) / voiced;
    const double inst = f0 * (1.0 + 0.08 * std::sin(std::numbers::pi * t) - 0.05 * t);
    phase += inst / fs;
    double pulse = 0.0;
    if (phase >= 1.0) {
      phase -= 1.0;
      pulse = 1.0 + 0.05 * g.gaussian();
    }
    lp = v.tilt * lp + pulse;
    src[n] = lp + 0.02 * g.gaussian();
  }

  const auto& fm = kDigitFormants[static_cast<std::size_t>(digit)];
  std::vector<double> out(voiced, 0.0);
  const std::array<double, 3> bws = {80.0, 110.0, 160.0};
  const std::array<double, 3> amps = {1.0, 0.6, 0.35};
  for (int k = 0; k < 3; ++k) {
    std::vector<double> freq(voiced);
    for (std::size_t n = 0; n < voiced; ++n) {
      const double t = static_cast<double>(n) / voiced;
      const double s = t * t * (3.0 - 2.0 * t);
      const double f = tract * ((1.0 - s) * fm[static_cast<std::size_t>(k)] + s * fm[static_cast<std::size_t>(k + 3)]);
      freq[n] = std::min(f, 0.45 * fs);
    }
    auto band = src;
    resonate(band, freq, bws[static_cast<std::size_t>(k)], fs);
    resonate(band, freq, bws[static_cast<std::size_t>(k)], fs);
    for (std::size_t n = 0; n < voiced; ++n) out[n] += amps[static_cast<std::size_t>(k)] * band[n];
  }

  double peak = 1e-12;
  for (std::size_t n = 0; n < voiced; ++n) {
    const double t = static_cast<double>(n) / voiced;
    out[n] *= std::sin(std::numbers::pi * std::min(1.0, 8.0 * std::min(t, 1.0 - t)) / 2.0);
    peak = std::max(peak, std::abs(out[n]));
  }
  const double level = (0.3 + 0.5 * g.uniform()) * 32767.0 / peak;

  Clip clip;
  clip.sample_rate = fs;
  clip.label = synth_speaker_name(speaker);
  clip.samples.assign(lead + voiced + tail, 0);
  for (std::size_t n = 0; n < clip.samples.size(); ++n) {
    double s = 3.0 * g.gaussian();
    if (n >= lead && n < lead + voiced) s += level * out[n - lead];
    clip.samples[n] = static_cast<std::int16_t>(std::clamp(std::round(s), -32768.0, 32767.0));
  }
  return clip;
}

int write_synth_corpus(const std::string& dir, const SynthConfig& cfg) {
  std::filesystem::create_directories(dir);
  int count = 0;
  for (int s = 0; s < cfg.speakers; ++s) {
    for (int d = 0; d < cfg.digits; ++d) {
      for (int i = 0; i < cfg.per_digit; ++i) {
        const auto clip = synth_utterance(cfg, s, d, i);
        const auto name = std::to_string(d) + "_" + synth_speaker_name(s) + "_" + std::to_string(i) + ".wav";
        write_wav((std::filesystem::path(dir) / name).string(), clip);
        ++count;
      }
    }
  }
  return count;
}

}  // namespace infilter
