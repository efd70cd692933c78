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

#include "infilter/serialize.hpp"

#include <array>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "infilter/error.hpp"

namespace infilter {

using nlohmann::json;

std::string real_to_string(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double real_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw FormatError("expected a decimal string");
  const auto s = j.get<std::string>();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) throw FormatError("bad decimal '" + s + "'");
  return v;
}

namespace {

json reals(const auto& v) {
  json a = json::array();
  for (auto x : v) a.push_back(real_to_string(x));
  return a;
}

std::vector<double> reals_from(const json& a) {
  std::vector<double> out;
  for (const auto& x : a) out.push_back(real_from_json(x));
  return out;
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

json cochlea_config_to_json(const CochleaConfig& c) {
  return json{{"P", c.num_channels},
              {"f_s", real_to_string(c.sample_rate)},
              {"damping", real_to_string(c.damping)},
              {"x_lo", real_to_string(c.x_lo)},
              {"x_hi", real_to_string(c.resolved_x_hi())},
              {"W", c.window_len}};
}

CochleaConfig cochlea_config_from_json(const json& j) {
  return guarded("cochlea config", [&] {
    CochleaConfig c;
    c.num_channels = j.at("P").get<int>();
    c.sample_rate = real_from_json(j.at("f_s"));
    c.damping = real_from_json(j.at("damping"));
    c.x_lo = real_from_json(j.at("x_lo"));
    c.x_hi = real_from_json(j.at("x_hi"));
    c.window_len = j.at("W").get<int>();
    c.validate();
    return c;
  });
}

namespace {

constexpr std::array<std::pair<const char*, FixedFormat DatapathFormats::*>, 10> kFormatFields = {{
    {"input", &DatapathFormats::input},
    {"coeff", &DatapathFormats::coeff},
    {"coeff_product", &DatapathFormats::coeff_product},
    {"state", &DatapathFormats::state},
    {"accumulator", &DatapathFormats::accumulator},
    {"std_params", &DatapathFormats::std_params},
    {"std_recip", &DatapathFormats::std_recip},
    {"feature_mid", &DatapathFormats::feature_mid},
    {"feature_out", &DatapathFormats::feature_out},
    {"weight", &DatapathFormats::weight},
}};

}  // namespace

json datapath_formats_to_json(const DatapathFormats& f) {
  json j = json::object();
  for (const auto& [name, field] : kFormatFields) {
    const FixedFormat& x = f.*field;
    j[name] = {{"total_bits", x.total_bits}, {"frac_bits", x.frac_bits}, {"signed", x.is_signed}};
  }
  return j;
}

// Missing entries keep their defaults; an entry may also be a tag like "u30.12".
DatapathFormats datapath_formats_from_json(const json& j) {
  DatapathFormats f;
  try {
    for (const auto& [name, field] : kFormatFields) {
      if (!j.contains(name)) continue;
      const auto& x = j.at(name);
      if (x.is_string()) {
        f.*field = FixedFormat::parse(x.get<std::string>());
      } else {
        f.*field = FixedFormat{x.at("total_bits").get<int>(), x.at("frac_bits").get<int>(), x.at("signed").get<bool>()};
        (f.*field).validate();
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("formats: ") + e.what());
  }
  f.validate();
  return f;
}

json filterbank_to_json(const FilterBank& bank) {
  json stages = json::array();
  for (const auto& s : bank.stages()) {
    stages.push_back({{"a0", real_to_string(s.a0)},
                      {"c0", real_to_string(s.c0)},
                      {"r", real_to_string(s.r)},
                      {"k", real_to_string(s.k)},
                      {"g", real_to_string(s.g)},
                      {"f_pole", real_to_string(s.f_pole)}});
  }
  return json{{"version", kFilterBankVersion}, {"config", cochlea_config_to_json(bank.config())}, {"stages", stages}};
}

FilterBank filterbank_from_json(const json& j) {
  return guarded("filter bank", [&] {
    if (j.at("version").get<int>() != kFilterBankVersion) throw FormatError("unsupported filter bank version");
    auto config = cochlea_config_from_json(j.at("config"));
    std::vector<CarStageCoeffs> stages;
    for (const auto& s : j.at("stages")) {
      stages.push_back(CarStageCoeffs{real_from_json(s.at("a0")), real_from_json(s.at("c0")),
                                      real_from_json(s.at("r")), real_from_json(s.at("k")),
                                      real_from_json(s.at("g")), real_from_json(s.at("f_pole"))});
    }
    return FilterBank(config, std::move(stages));
  });
}

json solver_report_to_json(const SolverReport& r) {
  return json{{"method", r.method},
              {"iterations", r.iterations},
              {"objective", real_to_string(r.objective)},
              {"kkt_residual", real_to_string(r.kkt_residual)},
              {"equality_residual", real_to_string(r.equality_residual)},
              {"reconstruction_residual", real_to_string(r.reconstruction_residual)},
              {"wall_seconds", real_to_string(r.wall_seconds)},
              {"converged", r.converged},
              {"bias_fallback", r.bias_fallback}};
}

SolverReport solver_report_from_json(const json& j) {
  return guarded("solver report", [&] {
    SolverReport r;
    r.method = j.at("method").get<std::string>();
    r.iterations = j.at("iterations").get<long>();
    r.objective = real_from_json(j.at("objective"));
    r.kkt_residual = real_from_json(j.at("kkt_residual"));
    r.equality_residual = real_from_json(j.at("equality_residual"));
    r.reconstruction_residual = real_from_json(j.at("reconstruction_residual"));
    if (j.contains("wall_seconds")) r.wall_seconds = real_from_json(j.at("wall_seconds"));
    r.converged = j.at("converged").get<bool>();
    r.bias_fallback = j.at("bias_fallback").get<bool>();
    return r;
  });
}

json model_to_json(const TemplateModel& m) {
  json j;
  j["version"] = kModelVersion;
  j["P"] = m.dim();
  j["C"] = real_to_string(m.C);
  j["Q"] = reals(std::vector<double>(m.Q.data(), m.Q.data() + m.Q.size()));
  j["b"] = real_to_string(m.b);
  j["mu"] = reals(m.standardizer.mu);
  j["sigma"] = reals(m.standardizer.sigma);
  j["sigma_floored"] = m.standardizer.floored;
  j["alpha"] = reals(std::vector<double>(m.alpha.data(), m.alpha.data() + m.alpha.size()));
  if (m.bank) j["filterbank"] = filterbank_to_json(*m.bank);
  j["solver_report"] = solver_report_to_json(m.report);
  j["train_accuracy"] = real_to_string(m.train_accuracy);
  return j;
}

TemplateModel model_from_json(const json& j) {
  return guarded("model", [&] {
    if (j.at("version").get<int>() != kModelVersion) throw FormatError("unsupported model version");
    TemplateModel m;
    const auto P = j.at("P").get<std::size_t>();
    m.C = real_from_json(j.at("C"));
    const auto Q = reals_from(j.at("Q"));
    m.Q = Eigen::Map<const Eigen::VectorXd>(Q.data(), static_cast<Eigen::Index>(Q.size()));
    m.b = real_from_json(j.at("b"));
    m.standardizer.mu = reals_from(j.at("mu"));
    m.standardizer.sigma = reals_from(j.at("sigma"));
    if (j.contains("sigma_floored")) m.standardizer.floored = j.at("sigma_floored").get<std::vector<int>>();
    if (j.contains("alpha")) {
      const auto a = reals_from(j.at("alpha"));
      m.alpha = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
    }
    if (j.contains("filterbank")) m.bank = filterbank_from_json(j.at("filterbank"));
    m.report = solver_report_from_json(j.at("solver_report"));
    m.train_accuracy = real_from_json(j.at("train_accuracy"));
    if (Q.size() != P || m.standardizer.mu.size() != P || m.standardizer.sigma.size() != P ||
        (m.bank && m.bank->size() != P)) {
      throw FormatError("model dimensions disagree with P");
    }
    return m;
  });
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError(path, "write failed");
}

json read_json_file(const std::string& path) {
  const auto text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::uint64_t content_hash(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace infilter
