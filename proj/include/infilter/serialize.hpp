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

// Versioned JSON documents for filter banks and models. Reals are written
// as decimal strings with 17 significant digits so they round-trip exactly.

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "infilter/cochlea.hpp"
#include "infilter/fixedpoint.hpp"
#include "infilter/svm.hpp"

namespace infilter {

inline constexpr int kFilterBankVersion = 1;
inline constexpr int kModelVersion = 1;

std::string real_to_string(double x);
double real_from_json(const nlohmann::json& j);

nlohmann::json cochlea_config_to_json(const CochleaConfig& c);
CochleaConfig cochlea_config_from_json(const nlohmann::json& j);

/// {name: {total_bits, frac_bits, signed}} for every datapath stage.
nlohmann::json datapath_formats_to_json(const DatapathFormats& f);
DatapathFormats datapath_formats_from_json(const nlohmann::json& j);

nlohmann::json filterbank_to_json(const FilterBank& bank);
FilterBank filterbank_from_json(const nlohmann::json& j);

nlohmann::json solver_report_to_json(const SolverReport& r);
SolverReport solver_report_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const TemplateModel& model);
TemplateModel model_from_json(const nlohmann::json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);
nlohmann::json read_json_file(const std::string& path);

/// 64-bit FNV-1a; stable across platforms, used for content-addressed names.
std::uint64_t content_hash(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hash_hex(std::uint64_t h);

}  // namespace infilter
