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

// Plain-text memory images for the coefficient, standardization, weight and
// bias memories. One two's-complement hex word per line, preceded by a
// single "//" header line that $readmemh skips.

#include <cstdint>
#include <string>
#include <vector>

#include "infilter/fixedpoint.hpp"

namespace infilter {

struct MemImage {
  std::string name;
  FixedFormat fmt;
  std::vector<std::string> fields;  // per-record field order, e.g. a0,c0,r,k,g
  std::vector<std::int64_t> words;
};

/// Hex digits of raw in fmt's width, lowercase, zero padded.
std::string to_hex_word(std::int64_t raw, const FixedFormat& fmt);
std::int64_t from_hex_word(const std::string& hex, const FixedFormat& fmt);

std::string render_mem(const MemImage& image);
MemImage parse_mem(const std::string& text);

void write_mem(const std::string& path, const MemImage& image);
MemImage read_mem(const std::string& path);

/// Writes <prefix>fcmem.hex, smem.hex, shmem.hex, wmem.hex, bmem.hex and
/// formats.json. Returns the paths written.
std::vector<std::string> export_mem(const QuantizedModel& model, const std::string& prefix);

/// Inverse of export_mem.
QuantizedModel import_mem(const std::string& prefix);

std::string formats_json(const QuantizedModel& model);

}  // namespace infilter
