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
#include <filesystem>
#include <map>
#include <sstream>

#include <json.hpp>

#include "infilter/error.hpp"
#include "infilter/manifest.hpp"
#include "infilter/random.hpp"
#include "infilter/serialize.hpp"

namespace infilter {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool is_wav(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".wav";
}

// {digit}_{speaker}_{index}.wav -> speaker; empty when the name does not match.
std::string fsdd_speaker(const std::string& stem) {
  const auto a = stem.find('_');
  const auto b = stem.rfind('_');
  if (a == std::string::npos || b == a || a == 0 || b + 1 >= stem.size()) return {};
  const auto digit = stem.substr(0, a);
  const auto index = stem.substr(b + 1);
  auto all_digits = [](const std::string& s) { return std::all_of(s.begin(), s.end(), ::isdigit); };
  if (!all_digits(digit) || !all_digits(index)) return {};
  return stem.substr(a + 1, b - a - 1);
}

// class -> sorted relative paths
std::map<std::string, std::vector<std::string>> scan(const std::string& root) {
  if (!fs::is_directory(root)) throw IoError(root, "dataset root is not a directory");
  std::map<std::string, std::vector<std::string>> classes;
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(d)) {
      if (e.is_regular_file() && is_wav(e.path())) files.push_back(fs::relative(e.path(), root).generic_string());
    }
    if (!files.empty()) classes[d.filename().string()] = std::move(files);
  }
  if (classes.empty()) {
    for (const auto& e : fs::directory_iterator(root)) {
      if (!e.is_regular_file() || !is_wav(e.path())) continue;
      const auto speaker = fsdd_speaker(e.path().stem().string());
      if (!speaker.empty()) classes[speaker].push_back(e.path().filename().generic_string());
    }
  }
  for (auto& [name, files] : classes) std::sort(files.begin(), files.end());
  return classes;
}

}  // namespace

std::string DatasetManifest::resolve(const ManifestEntry& e) const {
  return root.empty() ? e.path : (fs::path(root) / e.path).string();
}

std::vector<ManifestEntry> DatasetManifest::split(const std::string& name) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.split == name) out.push_back(e);
  }
  return out;
}

std::size_t DatasetManifest::count(const std::string& split_name, int label) const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [&](const ManifestEntry& e) {
    return e.split == split_name && e.label == label;
  }));
}

void DatasetManifest::validate() const {
  std::map<std::string, std::string> seen;
  for (const auto& e : entries) {
    if (e.label != 1 && e.label != -1) throw FormatError("manifest: label must be +1 or -1 for " + e.path);
    if (e.split != "train" && e.split != "test") throw FormatError("manifest: bad split '" + e.split + "' for " + e.path);
    auto [it, inserted] = seen.emplace(e.path, e.split);
    if (!inserted) throw FormatError("manifest: duplicate entry " + e.path);
  }
  for (const char* s : {"train", "test"}) {
    if (count(s, 1) == 0 || count(s, -1) == 0) {
      throw InputError(std::string("manifest: ") + s + " split lacks one of the classes");
    }
  }
}

std::vector<std::string> list_classes(const std::string& root) {
  std::vector<std::string> out;
  for (const auto& [name, files] : scan(root)) out.push_back(name);
  return out;
}

DatasetManifest build_manifest(const std::string& root, const std::string& target, std::uint64_t seed,
                               double train_frac) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw DomainError("build_manifest: train_frac must lie in (0, 1)");
  const auto classes = scan(root);
  const auto it = classes.find(target);
  if (it == classes.end()) throw InputError("build_manifest: class '" + target + "' not found under " + root);

  struct Item {
    std::string path, cls;
  };
  std::vector<Item> pos, pool;
  for (const auto& p : it->second) pos.push_back({p, target});
  for (const auto& [name, files] : classes) {
    if (name == target) continue;
    for (const auto& p : files) pool.push_back({p, name});
  }
  if (pool.empty()) throw InputError("build_manifest: no negative pool besides '" + target + "'");

  SplitMix64 rng(seed);
  rng.shuffle(std::span(pool));
  pool.resize(std::min(pool.size(), pos.size()));
  rng.shuffle(std::span(pos));

  DatasetManifest m;
  m.root = root;
  m.target = target;
  m.seed = seed;
  m.train_frac = train_frac;
  auto assign = [&](const std::vector<Item>& items, int label) {
    const auto n = items.size();
    auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, n > 1 ? 1 : 0, n > 1 ? n - 1 : n);
    for (std::size_t i = 0; i < n; ++i) {
      m.entries.push_back({items[i].path, items[i].cls, label, i < n_train ? "train" : "test"});
    }
  };
  assign(pos, 1);
  assign(pool, -1);
  std::sort(m.entries.begin(), m.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  m.validate();
  return m;
}

std::string render_manifest(const DatasetManifest& m) {
  std::ostringstream os;
  json header = {{"version", DatasetManifest::kVersion}, {"root", m.root},     {"target", m.target},
                 {"seed", m.seed},                       {"train_frac", m.train_frac},
                 {"pooling", "uniform-balanced"}};
  os << header.dump() << '\n';
  for (const auto& e : m.entries) {
    json j = {{"path", e.path}, {"class", e.class_name}, {"label", e.label}, {"split", e.split}};
    os << j.dump() << '\n';
  }
  return os.str();
}

DatasetManifest parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  DatasetManifest m;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = json::parse(line);
      if (!have_header) {
        if (j.at("version").get<int>() != DatasetManifest::kVersion) throw FormatError("manifest: unsupported version");
        m.root = j.value("root", std::string{});
        m.target = j.at("target").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.train_frac = j.value("train_frac", 0.8);
        have_header = true;
        continue;
      }
      m.entries.push_back({j.at("path").get<std::string>(), j.value("class", std::string{}), j.at("label").get<int>(),
                           j.at("split").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  if (!have_header) throw FormatError("manifest: missing header line");
  m.validate();
  return m;
}

void write_manifest(const std::string& path, const DatasetManifest& m) { write_text_file(path, render_manifest(m)); }

DatasetManifest read_manifest(const std::string& path) { return parse_manifest(read_text_file(path)); }

}  // namespace infilter
