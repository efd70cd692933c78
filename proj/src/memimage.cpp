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

#include "infilter/memimage.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "infilter/error.hpp"
#include "infilter/serialize.hpp"

namespace infilter {

using nlohmann::json;

std::string to_hex_word(std::int64_t raw, const FixedFormat& fmt) {
  if (raw < fmt.min_raw() || raw > fmt.max_raw()) throw InputError("hex word out of format range");
  const int digits = (fmt.total_bits + 3) / 4;
  const std::uint64_t mask = (fmt.total_bits == 64) ? ~0ULL : ((1ULL << fmt.total_bits) - 1);
  const std::uint64_t bits = static_cast<std::uint64_t>(raw) & mask;
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(static_cast<std::size_t>(digits), '0');
  for (int i = 0; i < digits; ++i) out[static_cast<std::size_t>(digits - 1 - i)] = kHex[(bits >> (4 * i)) & 0xF];
  return out;
}

std::int64_t from_hex_word(const std::string& hex, const FixedFormat& fmt) {
  if (hex.empty() || hex.size() != static_cast<std::size_t>((fmt.total_bits + 3) / 4)) {
    throw FormatError("hex word '" + hex + "' has the wrong width for " + fmt.describe());
  }
  std::uint64_t bits = 0;
  for (char c : hex) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else throw FormatError("bad hex digit in '" + hex + "'");
    bits = (bits << 4) | static_cast<std::uint64_t>(d);
  }
  if (bits >> fmt.total_bits) throw FormatError("hex word '" + hex + "' exceeds " + fmt.describe());
  std::int64_t raw = static_cast<std::int64_t>(bits);
  if (fmt.is_signed && (bits >> (fmt.total_bits - 1)) & 1) raw -= std::int64_t{1} << fmt.total_bits;
  return raw;
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

}  // namespace

std::string render_mem(const MemImage& image) {
  std::ostringstream os;
  os << "// " << image.name << " fmt=" << image.fmt.describe() << " count=" << image.words.size()
     << " fields=" << join(image.fields) << "\n";
  for (auto w : image.words) os << to_hex_word(w, image.fmt) << "\n";
  return os.str();
}

MemImage parse_mem(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("// ", 0) != 0) throw FormatError("memory image lacks header line");
  MemImage img;
  std::istringstream hs(line.substr(3));
  std::string tok;
  hs >> img.name;
  std::size_t count = 0;
  bool have_fmt = false, have_count = false;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "fmt") {
      img.fmt = FixedFormat::parse(val);
      have_fmt = true;
    } else if (key == "count") {
      count = std::stoul(val);
      have_count = true;
    } else if (key == "fields") {
      std::istringstream fs(val);
      std::string f;
      while (std::getline(fs, f, ',')) img.fields.push_back(f);
    }
  }
  if (!have_fmt || !have_count) throw FormatError("memory image header missing fmt or count");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    img.words.push_back(from_hex_word(line, img.fmt));
  }
  if (img.words.size() != count) throw FormatError("memory image word count disagrees with header");
  return img;
}

void write_mem(const std::string& path, const MemImage& image) { write_text_file(path, render_mem(image)); }

MemImage read_mem(const std::string& path) { return parse_mem(read_text_file(path)); }

std::string formats_json(const QuantizedModel& model) {
  json j;
  j["version"] = 1;
  j["formats"] = datapath_formats_to_json(model.formats());
  j["cochlea"] = cochlea_config_to_json(model.bank.config());
  j["weight_exponent"] = model.weight_exponent;
  return j.dump(2) + "\n";
}

std::vector<std::string> export_mem(const QuantizedModel& model, const std::string& prefix) {
  const auto& f = model.formats();
  MemImage fc{"fcmem", f.coeff, {"a0", "c0", "r", "k", "g"}, {}};
  for (const auto& s : model.bank.stages()) fc.words.insert(fc.words.end(), {s.a0, s.c0, s.r, s.k, s.g});
  MemImage sm{"smem", f.std_params, {"mu", "sigma"}, {}};
  for (std::size_t p = 0; p < model.standardizer.size(); ++p) {
    sm.words.push_back(model.standardizer.mu[p]);
    sm.words.push_back(model.standardizer.sigma[p]);
  }
  MemImage sh{"shmem", FixedFormat{8, 0, true}, {"shift"}, {}};
  for (int s : model.standardizer.shift) sh.words.push_back(s);
  MemImage wm{"wmem", f.weight, {"Q"}, model.q};
  MemImage bm{"bmem", f.weight, {"b"}, {model.b}};

  std::vector<std::string> paths;
  for (const auto* img : {&fc, &sm, &sh, &wm, &bm}) {
    paths.push_back(prefix + img->name + ".hex");
    write_mem(paths.back(), *img);
  }
  paths.push_back(prefix + "formats.json");
  write_text_file(paths.back(), formats_json(model));
  return paths;
}

QuantizedModel import_mem(const std::string& prefix) {
  json j;
  try {
    j = json::parse(read_text_file(prefix + "formats.json"));
  } catch (const json::exception& e) {
    throw FormatError(prefix + "formats.json: " + e.what());
  }
  const DatapathFormats f = datapath_formats_from_json(j.at("formats"));
  const auto config = cochlea_config_from_json(j.at("cochlea"));
  const auto P = static_cast<std::size_t>(config.num_channels);

  auto load = [&](const char* name, const FixedFormat& expect, std::size_t count) {
    auto img = read_mem(prefix + name + ".hex");
    if (!(img.fmt == expect)) throw FormatError(std::string(name) + ".hex format disagrees with formats.json");
    if (img.words.size() != count) throw FormatError(std::string(name) + ".hex has the wrong word count");
    return img.words;
  };
  const auto fc = load("fcmem", f.coeff, 5 * P);
  const auto sm = load("smem", f.std_params, 2 * P);
  const auto sh = load("shmem", FixedFormat{8, 0, true}, P);
  const auto wm = load("wmem", f.weight, P);
  const auto bm = load("bmem", f.weight, 1);

  std::vector<QuantizedStage> stages(P);
  for (std::size_t p = 0; p < P; ++p) {
    stages[p] = {fc[5 * p], fc[5 * p + 1], fc[5 * p + 2], fc[5 * p + 3], fc[5 * p + 4]};
  }
  QuantizedStandardizer st;
  for (std::size_t p = 0; p < P; ++p) {
    st.mu.push_back(sm[2 * p]);
    st.sigma.push_back(sm[2 * p + 1]);
    st.shift.push_back(static_cast<int>(sh[p]));
  }
  st.recip = derive_reciprocals(st.sigma, f);
  QuantizedModel m{QuantizedBank(config, f, std::move(stages)), std::move(st), wm, bm[0],
                   j.at("weight_exponent").get<int>(), {}};
  return m;
}

}  // namespace infilter
