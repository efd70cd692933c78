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

// CAR-IHC filter bank: coefficient design, the floating-point cascade, the
// half-wave-rectified window accumulator and per-channel standardization.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace infilter {

/// Greenwood place-to-frequency map. x is the normalized cochlear position,
/// 0 at the apex and 1 at the base.
double greenwood_freq(double x);

/// Inverse of greenwood_freq for f >= 0.
double greenwood_position(double f_hz);

struct CochleaConfig {
  int num_channels = 30;
  double sample_rate = 16000.0;
  double damping = 0.2;
  double x_lo = 0.1;
  double x_hi = 0.0;  // 0 means "top pole at 0.45 * sample_rate"
  int window_len = 16000;

  /// Defaults for a given rate and channel count: x_hi puts the top pole at
  /// 0.45 * f_s and the window is one second long.
  static CochleaConfig defaults(double sample_rate = 16000.0, int num_channels = 30);

  /// x_hi with the 0-sentinel resolved.
  double resolved_x_hi() const;

  void validate() const;
  bool operator==(const CochleaConfig&) const = default;
};

struct CarStageCoeffs {
  double a0 = 1.0;  // cos(theta_R)
  double c0 = 0.0;  // sin(theta_R)
  double r = 0.0;   // pole and zero radius
  double k = 0.0;   // zero offset
  double g = 1.0;   // DC gain normalization
  double f_pole = 0.0;
  bool operator==(const CarStageCoeffs&) const = default;
};

// Direct-form coefficients of one stage, normalized so a[0] == 1.
struct BiquadCoeffs {
  double b0, b1, b2;
  double a1, a2;
};

BiquadCoeffs to_biquad(const CarStageCoeffs& s);

/// Designs one two-pole two-zero stage. `stage` only labels the error.
CarStageCoeffs design_stage(double f_pole, double sample_rate, double damping, int stage = -1);

class FilterBank {
 public:
  FilterBank(CochleaConfig config, std::vector<CarStageCoeffs> stages);

  const CochleaConfig& config() const { return config_; }
  const std::vector<CarStageCoeffs>& stages() const { return stages_; }
  const std::vector<BiquadCoeffs>& biquads() const { return biquads_; }
  std::size_t size() const { return stages_.size(); }

  bool operator==(const FilterBank& o) const {
    return config_ == o.config_ && stages_ == o.stages_;
  }

 private:
  CochleaConfig config_;
  std::vector<CarStageCoeffs> stages_;
  std::vector<BiquadCoeffs> biquads_;
};

/// Uniform position grid over [x_lo, x_hi], inclusive, ordered base to apex.
std::vector<double> pole_positions(const CochleaConfig& config);

FilterBank design_filterbank(const CochleaConfig& config);

/// Transposed direct-form II state of every stage. One instance per stream.
class CascadeState {
 public:
  explicit CascadeState(std::size_t num_stages) : z_(num_stages, {0.0, 0.0}) {}

  void reset();
  std::size_t size() const { return z_.size(); }

  /// Pushes x through the cascade; out[p] receives stage p's output.
  void step(const FilterBank& bank, double x, std::span<double> out);

 private:
  std::vector<std::array<double, 2>> z_;
};

inline double ihc_hwr(double b) { return b > 0.0 ? b : 0.0; }

/// Sum over the window of the rectified output of every stage, starting
/// from a reset cascade. samples.size() must equal the configured window.
std::vector<double> accumulate_window(const FilterBank& bank, std::span<const double> samples);

/// Same accumulation without the window-length check.
std::vector<double> accumulate_signal(const FilterBank& bank, std::span<const double> samples);

struct Standardizer {
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<int> floored;  // channels whose sigma hit the epsilon floor

  std::size_t size() const { return mu.size(); }
  std::vector<double> apply(std::span<const double> s) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& S) const;
};

/// Column moments of an N x P accumulation matrix (N >= 2), sample std.
Standardizer fit_standardizer(const Eigen::MatrixXd& S);

struct FeatureVector {
  std::vector<double> phi;
  std::string source_id;
};

FeatureVector featurize(std::span<const double> signal, const FilterBank& bank,
                        const Standardizer& std, std::string source_id = {});

/// 16-bit PCM to the [-1, 1) range the float datapath uses.
std::vector<double> pcm_to_real(std::span<const std::int16_t> pcm);

}  // namespace infilter
