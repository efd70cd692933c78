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

#include "infilter/audio.hpp"
#include "infilter/random.hpp"

namespace infilter {

namespace {

std::int16_t round_sat16(double v) {
  const double r = std::round(v);
  return static_cast<std::int16_t>(std::clamp(r, -32768.0, 32767.0));
}

}  // namespace

double signal_power(std::span<const std::int16_t> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (auto s : x) acc += static_cast<double>(s) * s;
  return acc / static_cast<double>(x.size());
}

Clip resample_linear(const Clip& clip, int target_rate) {
  if (target_rate <= 0 || clip.sample_rate <= 0) throw DomainError("resample_linear: rates must be positive");
  if (target_rate == clip.sample_rate) return clip;
  Clip out = clip;
  out.sample_rate = target_rate;
  const auto n = static_cast<std::int64_t>(clip.samples.size());
  const std::int64_t src = clip.sample_rate, dst = target_rate;
  const std::int64_t m = n * dst / src;
  out.samples.assign(static_cast<std::size_t>(m), 0);
  for (std::int64_t i = 0; i < m; ++i) {
    const std::int64_t num = i * src;
    const std::int64_t idx = num / dst;
    const double frac = static_cast<double>(num % dst) / static_cast<double>(dst);
    const double a = clip.samples[static_cast<std::size_t>(idx)];
    const double b = clip.samples[static_cast<std::size_t>(std::min(idx + 1, n - 1))];
    out.samples[static_cast<std::size_t>(i)] = round_sat16(a + (b - a) * frac);
  }
  return out;
}

Clip trim_silence(const Clip& clip, double threshold_db, double window_ms) {
  if (window_ms <= 0.0) throw DomainError("trim_silence: window must be positive");
  const std::size_t n = clip.samples.size();
  const auto win = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(clip.sample_rate * window_ms / 1000.0)));
  if (n <= win) return clip;

  double peak = 0.0;
  for (auto s : clip.samples) peak = std::max(peak, std::abs(static_cast<double>(s)));
  const double floor_rms = peak * std::pow(10.0, threshold_db / 20.0);

  const std::size_t nwin = (n + win - 1) / win;
  std::vector<double> rms(nwin);
  for (std::size_t k = 0; k < nwin; ++k) {
    const std::size_t lo = k * win, hi = std::min(n, lo + win);
    rms[k] = std::sqrt(signal_power(std::span(clip.samples).subspan(lo, hi - lo)));
  }
  std::size_t first = nwin, last = 0;
  if (peak > 0.0) {
    for (std::size_t k = 0; k < nwin; ++k) {
      if (rms[k] >= floor_rms) {
        if (first == nwin) first = k;
        last = k;
      }
    }
  }
  if (first == nwin) {
    first = last = static_cast<std::size_t>(std::max_element(rms.begin(), rms.end()) - rms.begin());
  }
  Clip out = clip;
  const std::size_t lo = first * win, hi = std::min(n, (last + 1) * win);
  out.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(lo),
                     clip.samples.begin() + static_cast<std::ptrdiff_t>(hi));
  return out;
}

std::vector<std::vector<std::int16_t>> frame_fixed(const Clip& clip, std::size_t W) {
  if (W == 0) throw DomainError("frame_fixed: window length must be positive");
  std::vector<std::vector<std::int16_t>> out;
  const std::size_t n = clip.samples.size();
  const std::size_t full = n / W, rem = n % W;
  for (std::size_t k = 0; k < full; ++k) {
    out.emplace_back(clip.samples.begin() + static_cast<std::ptrdiff_t>(k * W),
                     clip.samples.begin() + static_cast<std::ptrdiff_t>((k + 1) * W));
  }
  if (rem > 0 && (2 * rem >= W || full == 0)) {
    std::vector<std::int16_t> w(W, 0);
    std::copy(clip.samples.begin() + static_cast<std::ptrdiff_t>(full * W), clip.samples.end(), w.begin());
    out.push_back(std::move(w));
  }
  return out;
}

Clip add_awgn(const Clip& clip, double snr_db, std::uint64_t seed) {
  if (!std::isfinite(snr_db)) throw DomainError("add_awgn: SNR must be finite");
  const double ps = signal_power(clip.samples);
  if (ps <= 0.0) throw DomainError("add_awgn: clip has zero power, SNR undefined");
  const double sigma = std::sqrt(ps / std::pow(10.0, snr_db / 10.0));
  SplitMix64 rng(seed);
  Clip out = clip;
  for (auto& s : out.samples) s = round_sat16(s + sigma * rng.gaussian());
  return out;
}

}  // namespace infilter
