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

// Bit-exact integer model of the hardware datapath. Every value is a raw
// two's-complement integer tagged with a Q-format; every narrowing step
// rounds half away from zero and saturates, counting each saturation.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "infilter/cochlea.hpp"
#include "infilter/svm.hpp"

namespace infilter {

struct FixedFormat {
  int total_bits = 16;
  int frac_bits = 15;
  bool is_signed = true;

  std::int64_t max_raw() const;
  std::int64_t min_raw() const;
  double lsb() const;
  double max_value() const { return static_cast<double>(max_raw()) * lsb(); }
  void validate() const;
  std::string describe() const;  // e.g. "s16.15", "u26.12"
  static FixedFormat parse(const std::string& tag);  // inverse of describe()
  bool operator==(const FixedFormat&) const = default;
};

struct FixedValue {
  std::int64_t raw = 0;
  FixedFormat fmt;
  double value() const { return static_cast<double>(raw) * fmt.lsb(); }
};

struct OverflowCounter {
  std::uint64_t saturations = 0;
};

/// Rounds v * 2^-shift half away from zero; a negative shift scales up.
__int128 round_shift(__int128 v, int shift);

/// Clamps v into fmt's range, bumping the counter when it clips.
std::int64_t saturate(__int128 v, const FixedFormat& fmt, OverflowCounter* ovf = nullptr);

FixedValue quantize(double x, const FixedFormat& fmt, OverflowCounter* ovf = nullptr);
inline double dequantize(const FixedValue& v) { return v.value(); }

/// Exact product or sum, then a single rounding into out.
FixedValue fx_mul(const FixedValue& a, const FixedValue& b, const FixedFormat& out,
                  OverflowCounter* ovf = nullptr);
FixedValue fx_add(const FixedValue& a, const FixedValue& b, const FixedFormat& out,
                  OverflowCounter* ovf = nullptr);

struct DatapathFormats {
  FixedFormat input{16, 15, true};
  FixedFormat coeff{12, 10, true};
  FixedFormat coeff_product{24, 20, true};  // biquad taps derived from stored coefficients
  FixedFormat state{16, 12, true};          // stage output and delay elements
  FixedFormat accumulator{26, 12, false};
  FixedFormat std_params{12, 6, true};
  FixedFormat std_recip{12, 9, false};
  FixedFormat feature_mid{12, 6, true};
  FixedFormat feature_out{8, 4, true};
  FixedFormat weight{8, 4, true};

  void validate() const;
  bool operator==(const DatapathFormats&) const = default;
};

/// Bits an unsigned accumulator needs to sum `count` non-negative words of a
/// signed `hwr_bits`-wide rectifier output without wrapping.
int accumulator_bits_required(int hwr_bits, std::int64_t count);

struct QuantizationDiagnostics {
  std::vector<std::string> saturated;  // parameter names, e.g. "Q[3]", "g[0]"
  double max_abs_error = 0.0;          // in units of each parameter's own LSB
};

struct QuantizedStage {
  std::int64_t a0 = 0, c0 = 0, r = 0, k = 0, g = 0;
  bool operator==(const QuantizedStage&) const = default;
};

// Products of the stored stage bits, in coeff_product format. The integer
// cascade runs each stage as a rotation section
//   u' = r a0 u - r c0 v + g k x,   v' = r c0 u + r a0 v,   y = g x + v'
// whose transfer function equals the stage biquad; the pole angle is carried
// by c0 directly, which keeps low-frequency stages accurate at 12 bits, and
// the states stay on the scale of the stage output.
struct StageTaps {
  std::int64_t ra0, rc0, gk, g;
};

class QuantizedBank {
 public:
  QuantizedBank(CochleaConfig config, DatapathFormats fmts, std::vector<QuantizedStage> stages);

  const CochleaConfig& config() const { return config_; }
  const DatapathFormats& formats() const { return fmts_; }
  const std::vector<QuantizedStage>& stages() const { return stages_; }
  const std::vector<StageTaps>& taps() const { return taps_; }
  std::size_t size() const { return stages_.size(); }

 private:
  CochleaConfig config_;
  DatapathFormats fmts_;
  std::vector<QuantizedStage> stages_;
  std::vector<StageTaps> taps_;
};

struct BankQuantizeOptions {
  // Re-solve g from the quantized a0, c0, r, k so each stored stage keeps
  // unity DC gain.
  bool dc_compensate_gain = true;
};

QuantizedBank quantize_bank(const FilterBank& bank, const DatapathFormats& fmts,
                            BankQuantizeOptions opts = {},
                            QuantizationDiagnostics* diag = nullptr);

// Standardization parameters as stored. Channel p's accumulator word is
// shifted right by (accumulator.frac - feature_mid.frac + shift[p]) to land
// in feature_mid; mu and sigma live in that same prescaled domain.
struct QuantizedStandardizer {
  std::vector<std::int64_t> mu;
  std::vector<std::int64_t> sigma;
  std::vector<int> shift;
  std::vector<std::int64_t> recip;  // derived from sigma bits, std_recip format

  std::size_t size() const { return mu.size(); }
};

/// Rebuilds the reciprocal words from stored sigma bits.
std::vector<std::int64_t> derive_reciprocals(std::span<const std::int64_t> sigma,
                                             const DatapathFormats& fmts);

QuantizedStandardizer quantize_standardizer(const Standardizer& st, const DatapathFormats& fmts,
                                            QuantizationDiagnostics* diag = nullptr);

struct QuantizeOptions {
  // Scale Q and b by a common power of two so the largest magnitude uses
  // the top half of the weight range. The sign of the decision is unchanged.
  bool normalize_weights = true;
  BankQuantizeOptions bank;
};

struct QuantizedModel {
  QuantizedBank bank;
  QuantizedStandardizer standardizer;
  std::vector<std::int64_t> q;
  std::int64_t b = 0;
  int weight_exponent = 0;  // stored weights are Q * 2^weight_exponent
  QuantizationDiagnostics diagnostics;

  const DatapathFormats& formats() const { return bank.formats(); }
};

QuantizedModel quantize_model(const TemplateModel& model, const DatapathFormats& fmts,
                              QuantizeOptions opts = {});

struct DatapathStats {
  std::uint64_t state_saturations = 0;
  std::uint64_t accumulator_saturations = 0;
  std::uint64_t mid_saturations = 0;
  std::uint64_t output_saturations = 0;
  std::uint64_t total() const {
    return state_saturations + accumulator_saturations + mid_saturations + output_saturations;
  }
};

/// Runs the integer cascade from a reset state and returns the raw
/// accumulator word of every channel. No window-length check.
std::vector<std::int64_t> fx_accumulate(std::span<const std::int16_t> samples,
                                        const QuantizedBank& bank, DatapathStats* stats = nullptr);

struct FixedFeatureVector {
  std::vector<std::int64_t> accum;  // accumulator format
  std::vector<std::int64_t> mid;    // feature_mid format, prescaled per channel
  std::vector<std::int64_t> phi;    // feature_out format
  DatapathStats stats;
};

/// Accumulator words to standardized output features.
FixedFeatureVector fx_standardize(std::vector<std::int64_t> accum, const QuantizedStandardizer& st,
                                  const DatapathFormats& fmts);

FixedFeatureVector fx_featurize(std::span<const std::int16_t> signal, const QuantizedBank& bank,
                                const QuantizedStandardizer& st);

/// Wide-sample overload; rejects anything outside the 16-bit input range.
FixedFeatureVector fx_featurize(std::span<const std::int32_t> signal, const QuantizedBank& bank,
                                const QuantizedStandardizer& st);

/// Integer decision sum in (feature_out.frac + weight.frac) fraction bits.
std::int64_t fx_decision(std::span<const std::int64_t> phi, const QuantizedModel& model,
                         MacCounter* macs = nullptr);

inline int fx_classify(std::span<const std::int64_t> phi, const QuantizedModel& model) {
  return fx_decision(phi, model) >= 0 ? 1 : -1;
}

/// Real values of the raw output features.
std::vector<double> dequantize_features(std::span<const std::int64_t> phi, const DatapathFormats& fmts);

}  // namespace infilter
