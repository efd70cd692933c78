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

#include "infilter/cochlea.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "infilter/error.hpp"

namespace infilter {

namespace {

constexpr double kGreenwoodA = 165.4;
constexpr double kGreenwoodAlpha = 2.1;
constexpr double kTopPoleFraction = 0.45;

}  // namespace

double greenwood_freq(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("greenwood_freq: position " + std::to_string(x) + " outside [0, 1]");
  }
  return kGreenwoodA * (std::pow(10.0, kGreenwoodAlpha * x) - 1.0);
}

double greenwood_position(double f_hz) {
  if (!(f_hz >= 0.0)) throw DomainError("greenwood_position: negative frequency");
  return std::log10(f_hz / kGreenwoodA + 1.0) / kGreenwoodAlpha;
}

CochleaConfig CochleaConfig::defaults(double sample_rate, int num_channels) {
  CochleaConfig c;
  c.num_channels = num_channels;
  c.sample_rate = sample_rate;
  c.window_len = static_cast<int>(std::lround(sample_rate));
  c.x_hi = std::min(1.0, greenwood_position(kTopPoleFraction * sample_rate));
  return c;
}

double CochleaConfig::resolved_x_hi() const {
  if (x_hi > 0.0) return x_hi;
  return std::min(1.0, greenwood_position(kTopPoleFraction * sample_rate));
}

void CochleaConfig::validate() const {
  auto fail = [](const std::string& m) { throw DomainError("cochlea config: " + m); };
  if (num_channels < 1) fail("num_channels must be >= 1");
  if (!(sample_rate > 0.0)) fail("sample_rate must be positive");
  if (!(damping > 0.0)) fail("damping must be positive");
  const double hi = resolved_x_hi();
  if (!(x_lo >= 0.0 && x_lo < hi && hi <= 1.0)) fail("need 0 <= x_lo < x_hi <= 1");
  if (window_len < 1) fail("window_len must be >= 1");
  if (!(greenwood_freq(hi) < 0.5 * sample_rate)) {
    fail("top pole " + std::to_string(greenwood_freq(hi)) + " Hz is not below Nyquist");
  }
}

BiquadCoeffs to_biquad(const CarStageCoeffs& s) {
  return BiquadCoeffs{
      .b0 = s.g,
      .b1 = s.g * (-2.0 * s.a0 + s.k * s.c0) * s.r,
      .b2 = s.g * s.r * s.r,
      .a1 = -2.0 * s.a0 * s.r,
      .a2 = s.r * s.r,
  };
}

CarStageCoeffs design_stage(double f_pole, double sample_rate, double damping, int stage) {
  if (!(sample_rate > 0.0)) throw DesignError(stage, "sample rate must be positive");
  if (!(f_pole > 0.0 && f_pole < 0.5 * sample_rate)) {
    throw DesignError(stage, "pole frequency " + std::to_string(f_pole) +
                                 " Hz outside (0, f_s/2)");
  }
  const double theta = 2.0 * std::numbers::pi * f_pole / sample_rate;
  CarStageCoeffs s;
  s.f_pole = f_pole;
  s.a0 = std::cos(theta);
  s.c0 = std::sin(theta);
  s.r = 1.0 - damping * theta;
  s.k = s.c0;
  if (!(s.r > 0.0 && s.r < 1.0)) {
    throw DesignError(stage, "radius r = " + std::to_string(s.r) + " outside (0, 1)");
  }
  if (!(s.k > 0.0 && s.k < (2.0 + 2.0 * s.a0) / s.c0)) {
    throw DesignError(stage, "complex-zero condition k < (2 + 2 a0) / c0 violated");
  }
  const double r2 = s.r * s.r;
  s.g = (1.0 - 2.0 * s.a0 * s.r + r2) / (1.0 - (2.0 * s.a0 - s.k * s.c0) * s.r + r2);
  if (!(s.g > 0.0) || !std::isfinite(s.g)) throw DesignError(stage, "non-positive DC gain factor");
  return s;
}

FilterBank::FilterBank(CochleaConfig config, std::vector<CarStageCoeffs> stages)
    : config_(config), stages_(std::move(stages)) {
  config_.validate();
  if (stages_.size() != static_cast<std::size_t>(config_.num_channels)) {
    throw DesignError(-1, "stage count does not match num_channels");
  }
  for (std::size_t p = 0; p < stages_.size(); ++p) {
    const auto& s = stages_[p];
    const int idx = static_cast<int>(p);
    if (std::abs(s.a0 * s.a0 + s.c0 * s.c0 - 1.0) > 1e-12) throw DesignError(idx, "a0^2 + c0^2 != 1");
    if (!(s.r > 0.0 && s.r < 1.0)) throw DesignError(idx, "r outside (0, 1)");
    if (!(s.k > 0.0 && s.k < (2.0 + 2.0 * s.a0) / s.c0)) throw DesignError(idx, "complex-zero condition");
    if (!(s.g > 0.0)) throw DesignError(idx, "g must be positive");
    if (p > 0 && !(s.f_pole < stages_[p - 1].f_pole)) {
      throw DesignError(idx, "pole frequencies must decrease along the cascade");
    }
  }
  biquads_.reserve(stages_.size());
  for (const auto& s : stages_) biquads_.push_back(to_biquad(s));
}

std::vector<double> pole_positions(const CochleaConfig& config) {
  config.validate();
  const int n = config.num_channels;
  const double lo = config.x_lo;
  const double hi = config.resolved_x_hi();
  std::vector<double> x(static_cast<std::size_t>(n));
  if (n == 1) {
    x[0] = 0.5 * (lo + hi);
    return x;
  }
  // Stage 0 sits at the base (highest frequency).
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = hi - (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  return x;
}

FilterBank design_filterbank(const CochleaConfig& config) {
  const auto x = pole_positions(config);
  std::vector<CarStageCoeffs> stages;
  stages.reserve(x.size());
  for (std::size_t p = 0; p < x.size(); ++p) {
    stages.push_back(design_stage(greenwood_freq(x[p]), config.sample_rate, config.damping,
                                  static_cast<int>(p)));
  }
  return FilterBank(config, std::move(stages));
}

void CascadeState::reset() {
  for (auto& z : z_) z = {0.0, 0.0};
}

void CascadeState::step(const FilterBank& bank, double x, std::span<double> out) {
  if (bank.size() != z_.size() || out.size() < z_.size()) {
    throw InputError("cascade state does not match filter bank");
  }
  if (!std::isfinite(x)) throw DatapathError("non-finite input sample");
  const auto& bq = bank.biquads();
  for (std::size_t p = 0; p < z_.size(); ++p) {
    const auto& c = bq[p];
    auto& z = z_[p];
    const double y = c.b0 * x + z[0];
    z[0] = c.b1 * x - c.a1 * y + z[1];
    z[1] = c.b2 * x - c.a2 * y;
    out[p] = y;
    x = y;
  }
}

std::vector<double> accumulate_signal(const FilterBank& bank, std::span<const double> samples) {
  const std::size_t P = bank.size();
  CascadeState state(P);
  std::vector<double> b(P), s(P, 0.0);
  for (double x : samples) {
    state.step(bank, x, b);
    for (std::size_t p = 0; p < P; ++p) s[p] += ihc_hwr(b[p]);
  }
  return s;
}

std::vector<double> accumulate_window(const FilterBank& bank, std::span<const double> samples) {
  const auto W = static_cast<std::size_t>(bank.config().window_len);
  if (samples.size() != W) {
    throw InputError("window has " + std::to_string(samples.size()) + " samples, expected " +
                     std::to_string(W));
  }
  return accumulate_signal(bank, samples);
}

Standardizer fit_standardizer(const Eigen::MatrixXd& S) {
  const auto N = S.rows();
  if (N < 2) throw FitError("standardizer needs at least two training rows");
  if (!S.allFinite()) throw FitError("non-finite accumulation in training matrix");
  Standardizer st;
  const auto P = static_cast<std::size_t>(S.cols());
  st.mu.resize(P);
  st.sigma.resize(P);
  for (Eigen::Index p = 0; p < S.cols(); ++p) {
    const double mu = S.col(p).mean();
    const double ss = (S.col(p).array() - mu).square().sum();
    double sigma = std::sqrt(ss / static_cast<double>(N - 1));
    const double floor = 1e-6 * std::max(1.0, std::abs(mu));
    if (!(sigma >= floor)) {
      sigma = floor;
      st.floored.push_back(static_cast<int>(p));
    }
    st.mu[static_cast<std::size_t>(p)] = mu;
    st.sigma[static_cast<std::size_t>(p)] = sigma;
  }
  return st;
}

std::vector<double> Standardizer::apply(std::span<const double> s) const {
  if (s.size() != mu.size()) throw InputError("standardizer dimension mismatch");
  std::vector<double> phi(s.size());
  for (std::size_t p = 0; p < s.size(); ++p) phi[p] = (s[p] - mu[p]) / sigma[p];
  return phi;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& S) const {
  if (static_cast<std::size_t>(S.cols()) != mu.size()) throw InputError("standardizer dimension mismatch");
  Eigen::MatrixXd out(S.rows(), S.cols());
  for (Eigen::Index p = 0; p < S.cols(); ++p) {
    const auto i = static_cast<std::size_t>(p);
    out.col(p) = (S.col(p).array() - mu[i]) / sigma[i];
  }
  return out;
}

FeatureVector featurize(std::span<const double> signal, const FilterBank& bank,
                        const Standardizer& std, std::string source_id) {
  const auto s = accumulate_window(bank, signal);
  return FeatureVector{std.apply(s), std::move(source_id)};
}

std::vector<double> pcm_to_real(std::span<const std::int16_t> pcm) {
  std::vector<double> out(pcm.size());
  for (std::size_t i = 0; i < pcm.size(); ++i) out[i] = static_cast<double>(pcm[i]) / 32768.0;
  return out;
}

}  // namespace infilter
