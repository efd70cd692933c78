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

#include "infilter/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "infilter/error.hpp"

namespace infilter {

std::int64_t FixedFormat::max_raw() const {
  const int mag_bits = is_signed ? total_bits - 1 : total_bits;
  return (std::int64_t{1} << mag_bits) - 1;
}

std::int64_t FixedFormat::min_raw() const {
  return is_signed ? -(std::int64_t{1} << (total_bits - 1)) : 0;
}

double FixedFormat::lsb() const { return std::ldexp(1.0, -frac_bits); }

void FixedFormat::validate() const {
  if (total_bits < 1 || total_bits > 32) throw DomainError("fixed format: total_bits must be in [1, 32]");
  if (frac_bits < 0 || frac_bits >= total_bits) {
    throw DomainError("fixed format: frac_bits must be in [0, total_bits)");
  }
  if (is_signed && total_bits < 2) throw DomainError("fixed format: signed needs at least 2 bits");
}

FixedFormat FixedFormat::parse(const std::string& tag) {
  const auto dot = tag.find('.');
  if (tag.size() < 4 || (tag[0] != 's' && tag[0] != 'u') || dot == std::string::npos || dot < 2 ||
      dot + 1 >= tag.size()) {
    throw FormatError("bad format tag '" + tag + "'");
  }
  FixedFormat f;
  f.is_signed = tag[0] == 's';
  try {
    f.total_bits = std::stoi(tag.substr(1, dot - 1));
    f.frac_bits = std::stoi(tag.substr(dot + 1));
  } catch (const std::exception&) {
    throw FormatError("bad format tag '" + tag + "'");
  }
  f.validate();
  return f;
}

std::string FixedFormat::describe() const {
  return (is_signed ? "s" : "u") + std::to_string(total_bits) + "." + std::to_string(frac_bits);
}

__int128 round_shift(__int128 v, int shift) {
  if (shift <= 0) return v * (static_cast<__int128>(1) << (-shift));
  const __int128 half = static_cast<__int128>(1) << (shift - 1);
  if (v >= 0) return (v + half) >> shift;
  return -((-v + half) >> shift);
}

std::int64_t saturate(__int128 v, const FixedFormat& fmt, OverflowCounter* ovf) {
  const auto hi = fmt.max_raw();
  const auto lo = fmt.min_raw();
  if (v > hi) {
    if (ovf) ++ovf->saturations;
    return hi;
  }
  if (v < lo) {
    if (ovf) ++ovf->saturations;
    return lo;
  }
  return static_cast<std::int64_t>(v);
}

FixedValue quantize(double x, const FixedFormat& fmt, OverflowCounter* ovf) {
  if (std::isnan(x)) throw DomainError("quantize: NaN input");
  const double scaled = std::round(std::ldexp(x, fmt.frac_bits));
  const auto hi = static_cast<double>(fmt.max_raw());
  const auto lo = static_cast<double>(fmt.min_raw());
  std::int64_t raw;
  if (scaled > hi) {
    raw = fmt.max_raw();
    if (ovf) ++ovf->saturations;
  } else if (scaled < lo) {
    raw = fmt.min_raw();
    if (ovf) ++ovf->saturations;
  } else {
    raw = static_cast<std::int64_t>(scaled);
  }
  return FixedValue{raw, fmt};
}

FixedValue fx_mul(const FixedValue& a, const FixedValue& b, const FixedFormat& out, OverflowCounter* ovf) {
  const __int128 prod = static_cast<__int128>(a.raw) * b.raw;
  const int shift = a.fmt.frac_bits + b.fmt.frac_bits - out.frac_bits;
  return FixedValue{saturate(round_shift(prod, shift), out, ovf), out};
}

FixedValue fx_add(const FixedValue& a, const FixedValue& b, const FixedFormat& out, OverflowCounter* ovf) {
  const int f = std::max(a.fmt.frac_bits, b.fmt.frac_bits);
  const __int128 sum = round_shift(a.raw, a.fmt.frac_bits - f) + round_shift(b.raw, b.fmt.frac_bits - f);
  return FixedValue{saturate(round_shift(sum, f - out.frac_bits), out, ovf), out};
}

void DatapathFormats::validate() const {
  for (const auto* f : {&input, &coeff, &coeff_product, &state, &accumulator, &std_params, &std_recip,
                        &feature_mid, &feature_out, &weight}) {
    f->validate();
  }
  if (input.total_bits != 16 || !input.is_signed) throw DomainError("datapath: input must be signed 16-bit");
  if (accumulator.is_signed) throw DomainError("datapath: accumulator must be unsigned");
  if (std_recip.is_signed) throw DomainError("datapath: reciprocal must be unsigned");
  if (feature_mid.frac_bits != std_params.frac_bits) {
    throw DomainError("datapath: feature_mid and std_params must share fraction bits");
  }
  if (accumulator.frac_bits != state.frac_bits) {
    throw DomainError("datapath: accumulator must carry the stage output fraction bits");
  }
  // Keeps every tap product and aligned delay term inside 64 bits.
  if (coeff_product.total_bits + std::max(input.total_bits, state.total_bits) +
          std::abs(input.frac_bits - state.frac_bits) + 2 > 62) {
    throw DomainError("datapath: coefficient product too wide for 64-bit arithmetic");
  }
}

int accumulator_bits_required(int hwr_bits, std::int64_t count) {
  // A rectified signed word is non-negative: hwr_bits - 1 magnitude bits.
  const auto max_word = (std::int64_t{1} << (hwr_bits - 1)) - 1;
  const __int128 worst = static_cast<__int128>(max_word) * count;
  int bits = 0;
  while ((static_cast<__int128>(1) << bits) <= worst) ++bits;
  return bits;
}

namespace {

void note(QuantizationDiagnostics* diag, const std::string& name, double x, const FixedValue& q,
          const OverflowCounter& ovf, std::uint64_t before) {
  if (!diag) return;
  if (ovf.saturations != before) {
    diag->saturated.push_back(name);
    return;
  }
  diag->max_abs_error = std::max(diag->max_abs_error, std::abs(q.value() - x) / q.fmt.lsb());
}

FixedValue quantize_named(double x, const FixedFormat& fmt, const std::string& name,
                          QuantizationDiagnostics* diag) {
  OverflowCounter ovf;
  const auto q = quantize(x, fmt, &ovf);
  note(diag, name, x, q, ovf, 0);
  return q;
}

std::string indexed(const char* name, std::size_t i) { return std::string(name) + "[" + std::to_string(i) + "]"; }

std::int64_t to_word(__int128 v, int from_frac, const FixedFormat& fmt) {
  return saturate(round_shift(v, from_frac - fmt.frac_bits), fmt);
}

StageTaps derive_taps(const QuantizedStage& s, const DatapathFormats& fmts) {
  const int cf = fmts.coeff.frac_bits;
  const auto& out = fmts.coeff_product;
  const __int128 a0 = s.a0, c0 = s.c0, r = s.r, k = s.k, g = s.g;
  StageTaps t{};
  t.ra0 = to_word(r * a0, 2 * cf, out);
  t.rc0 = to_word(r * c0, 2 * cf, out);
  t.gk = to_word(g * k, 2 * cf, out);
  t.g = to_word(g, cf, out);
  return t;
}

}  // namespace

QuantizedBank::QuantizedBank(CochleaConfig config, DatapathFormats fmts, std::vector<QuantizedStage> stages)
    : config_(config), fmts_(fmts), stages_(std::move(stages)) {
  fmts_.validate();
  if (stages_.size() != static_cast<std::size_t>(config_.num_channels)) {
    throw InputError("quantized bank: stage count does not match num_channels");
  }
  taps_.reserve(stages_.size());
  for (const auto& s : stages_) taps_.push_back(derive_taps(s, fmts_));
}

QuantizedBank quantize_bank(const FilterBank& bank, const DatapathFormats& fmts, BankQuantizeOptions opts,
                            QuantizationDiagnostics* diag) {
  fmts.validate();
  std::vector<QuantizedStage> out;
  out.reserve(bank.size());
  for (std::size_t p = 0; p < bank.size(); ++p) {
    const auto& s = bank.stages()[p];
    QuantizedStage q;
    q.a0 = quantize_named(s.a0, fmts.coeff, indexed("a0", p), diag).raw;
    q.c0 = quantize_named(s.c0, fmts.coeff, indexed("c0", p), diag).raw;
    q.r = quantize_named(s.r, fmts.coeff, indexed("r", p), diag).raw;
    q.k = quantize_named(s.k, fmts.coeff, indexed("k", p), diag).raw;
    double g = s.g;
    if (opts.dc_compensate_gain) {
      const double lsb = fmts.coeff.lsb();
      const double ra0 = q.r * lsb * q.a0 * lsb, rc0 = q.r * lsb * q.c0 * lsb, k = q.k * lsb;
      // DC gain of the stored section is g * (1 + k rc0 / den).
      const double den = 1.0 - 2.0 * ra0 + ra0 * ra0 + rc0 * rc0;
      if (den > 0.0) g = den / (den + k * rc0);
    }
    q.g = quantize_named(g, fmts.coeff, indexed("g", p), diag).raw;
    out.push_back(q);
  }
  return QuantizedBank(bank.config(), fmts, std::move(out));
}

std::vector<std::int64_t> derive_reciprocals(std::span<const std::int64_t> sigma, const DatapathFormats& fmts) {
  std::vector<std::int64_t> recip(sigma.size());
  for (std::size_t p = 0; p < sigma.size(); ++p) {
    const auto s = std::max<std::int64_t>(sigma[p], 1);
    recip[p] = quantize(1.0 / (static_cast<double>(s) * fmts.std_params.lsb()), fmts.std_recip).raw;
  }
  return recip;
}

QuantizedStandardizer quantize_standardizer(const Standardizer& st, const DatapathFormats& fmts,
                                            QuantizationDiagnostics* diag) {
  fmts.validate();
  QuantizedStandardizer q;
  const std::size_t P = st.size();
  q.mu.resize(P);
  q.sigma.resize(P);
  q.shift.resize(P);
  const int min_shift = -(fmts.accumulator.frac_bits - fmts.feature_mid.frac_bits);
  const double limit = fmts.feature_mid.max_value();
  for (std::size_t p = 0; p < P; ++p) {
    // Smallest prescale that keeps mu + 4 sigma inside the mid format.
    const double top = st.mu[p] + 4.0 * st.sigma[p];
    int sh = min_shift;
    while (sh < 40 && std::ldexp(top, -sh) > limit) ++sh;
    q.shift[p] = sh;
    q.mu[p] = quantize_named(std::ldexp(st.mu[p], -sh), fmts.std_params, indexed("mu", p), diag).raw;
    auto sig = quantize_named(std::ldexp(st.sigma[p], -sh), fmts.std_params, indexed("sigma", p), diag);
    if (sig.raw < 1) {
      sig.raw = 1;
      if (diag) diag->saturated.push_back(indexed("sigma", p));
    }
    q.sigma[p] = sig.raw;
  }
  q.recip = derive_reciprocals(q.sigma, fmts);
  return q;
}

QuantizedModel quantize_model(const TemplateModel& model, const DatapathFormats& fmts, QuantizeOptions opts) {
  if (!model.bank) throw InputError("quantize_model: model carries no filter bank");
  const std::size_t P = model.dim();
  if (model.standardizer.size() != P || model.bank->size() != P) {
    throw InputError("quantize_model: model dimensions disagree");
  }
  QuantizationDiagnostics diag;
  auto bank = quantize_bank(*model.bank, fmts, opts.bank, &diag);
  auto st = quantize_standardizer(model.standardizer, fmts, &diag);

  int e = 0;
  if (opts.normalize_weights) {
    double m = std::abs(model.b);
    for (Eigen::Index p = 0; p < model.Q.size(); ++p) m = std::max(m, std::abs(model.Q[p]));
    if (m > 0.0) {
      // Largest e with m * 2^e still below the format maximum.
      const double cap = fmts.weight.max_value();
      e = static_cast<int>(std::floor(std::log2(cap / m)));
      while (std::ldexp(m, e) > cap) --e;
      while (std::ldexp(m, e + 1) <= cap) ++e;
    }
  }
  QuantizedModel qm{std::move(bank), std::move(st), {}, 0, e, {}};
  qm.q.resize(P);
  for (std::size_t p = 0; p < P; ++p) {
    qm.q[p] = quantize_named(std::ldexp(model.Q[static_cast<Eigen::Index>(p)], e), fmts.weight,
                             indexed("Q", p), &diag).raw;
  }
  qm.b = quantize_named(std::ldexp(model.b, e), fmts.weight, "b", &diag).raw;
  qm.diagnostics = std::move(diag);
  return qm;
}

std::vector<std::int64_t> fx_accumulate(std::span<const std::int16_t> samples, const QuantizedBank& bank,
                                        DatapathStats* stats) {
  const auto& f = bank.formats();
  const auto& taps = bank.taps();
  const std::size_t P = bank.size();
  const int cf = f.coeff_product.frac_bits;
  const int sf = f.state.frac_bits;
  const auto smax = f.state.max_raw(), smin = f.state.min_raw();
  const auto amax = f.accumulator.max_raw();

  std::vector<std::int64_t> z0(P, 0), z1(P, 0), acc(P, 0);
  DatapathStats local;

  auto narrow = [&](std::int64_t v, int shift) {
    // shift > 0 here: round half away from zero, then clamp to state range.
    const std::int64_t half = std::int64_t{1} << (shift - 1);
    std::int64_t r = v >= 0 ? (v + half) >> shift : -((-v + half) >> shift);
    if (r > smax) {
      ++local.state_saturations;
      return smax;
    }
    if (r < smin) {
      ++local.state_saturations;
      return smin;
    }
    return r;
  };

  for (const std::int16_t sample : samples) {
    std::int64_t x = sample;
    int xf = f.input.frac_bits;
    for (std::size_t p = 0; p < P; ++p) {
      const auto& t = taps[p];
      // Common fraction for this stage's sums: taps times the wider operand.
      const int wf = cf + std::max(xf, sf);
      const int xs = wf - (cf + xf);
      const int ss = wf - (cf + sf);
      const int out = wf - sf;
      const std::int64_t u = z0[p], v = z1[p];
      z0[p] = narrow(((t.ra0 * u - t.rc0 * v) << ss) + ((t.gk * x) << xs), out);
      z1[p] = narrow((t.rc0 * u + t.ra0 * v) << ss, out);
      const std::int64_t y = narrow(((t.g * x) << xs) + (z1[p] << out), out);
      // Rectifier: the sign bit gates the word into the accumulator.
      if (y > 0) {
        acc[p] += y;
        if (acc[p] > amax) {
          acc[p] = amax;
          ++local.accumulator_saturations;
        }
      }
      x = y;
      xf = sf;
    }
  }
  if (stats) {
    stats->state_saturations += local.state_saturations;
    stats->accumulator_saturations += local.accumulator_saturations;
  }
  return acc;
}

FixedFeatureVector fx_standardize(std::vector<std::int64_t> accum, const QuantizedStandardizer& st,
                                  const DatapathFormats& fmts) {
  const std::size_t P = accum.size();
  if (st.size() != P || st.recip.size() != P || st.shift.size() != P) {
    throw InputError("fixed standardizer dimension mismatch");
  }
  FixedFeatureVector out;
  out.mid.resize(P);
  out.phi.resize(P);
  OverflowCounter mid_ovf, out_ovf;
  const int base = fmts.accumulator.frac_bits - fmts.feature_mid.frac_bits;
  const int prod_frac = fmts.std_params.frac_bits + fmts.std_recip.frac_bits;
  for (std::size_t p = 0; p < P; ++p) {
    out.mid[p] = saturate(round_shift(accum[p], base + st.shift[p]), fmts.feature_mid, &mid_ovf);
    const __int128 centered = static_cast<__int128>(out.mid[p]) - st.mu[p];
    out.phi[p] = saturate(round_shift(centered * st.recip[p], prod_frac - fmts.feature_out.frac_bits),
                          fmts.feature_out, &out_ovf);
  }
  out.accum = std::move(accum);
  out.stats.mid_saturations = mid_ovf.saturations;
  out.stats.output_saturations = out_ovf.saturations;
  return out;
}

FixedFeatureVector fx_featurize(std::span<const std::int16_t> signal, const QuantizedBank& bank,
                                const QuantizedStandardizer& st) {
  const auto W = static_cast<std::size_t>(bank.config().window_len);
  if (signal.size() != W) {
    throw InputError("window has " + std::to_string(signal.size()) + " samples, expected " + std::to_string(W));
  }
  DatapathStats stats;
  auto acc = fx_accumulate(signal, bank, &stats);
  auto out = fx_standardize(std::move(acc), st, bank.formats());
  out.stats.state_saturations = stats.state_saturations;
  out.stats.accumulator_saturations = stats.accumulator_saturations;
  return out;
}

FixedFeatureVector fx_featurize(std::span<const std::int32_t> signal, const QuantizedBank& bank,
                                const QuantizedStandardizer& st) {
  std::vector<std::int16_t> narrow(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    if (signal[i] < std::numeric_limits<std::int16_t>::min() || signal[i] > std::numeric_limits<std::int16_t>::max()) {
      throw InputError("sample " + std::to_string(i) + " does not fit the 16-bit input format");
    }
    narrow[i] = static_cast<std::int16_t>(signal[i]);
  }
  return fx_featurize(std::span<const std::int16_t>(narrow), bank, st);
}

std::int64_t fx_decision(std::span<const std::int64_t> phi, const QuantizedModel& model, MacCounter* macs) {
  if (phi.size() != model.q.size()) throw InputError("fx_decision: dimension mismatch");
  const auto& f = model.formats();
  std::int64_t sum = 0;
  for (std::size_t p = 0; p < phi.size(); ++p) sum += model.q[p] * phi[p];
  if (macs) macs->macs += phi.size();
  return sum + (model.b << f.feature_out.frac_bits);
}

std::vector<double> dequantize_features(std::span<const std::int64_t> phi, const DatapathFormats& fmts) {
  std::vector<double> out(phi.size());
  for (std::size_t p = 0; p < phi.size(); ++p) out[p] = static_cast<double>(phi[p]) * fmts.feature_out.lsb();
  return out;
}

}  // namespace infilter
