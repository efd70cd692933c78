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

#include <cstdint>
#include <string>
#include <vector>

namespace infilter {

struct ManifestEntry {
  std::string path;        // relative to DatasetManifest::root
  std::string class_name;  // speaker or directory name
  int label = 0;           // +1 target, -1 rest
  std::string split;       // "train" or "test"
};

struct DatasetManifest {
  static constexpr int kVersion = 1;
  std::string root;
  std::string target;
  std::uint64_t seed = 0;
  double train_frac = 0.8;
  std::vector<ManifestEntry> entries;

  std::string resolve(const ManifestEntry& e) const;
  std::vector<ManifestEntry> split(const std::string& name) const;
  std::size_t count(const std::string& split_name, int label) const;
  /// Disjoint splits, labels in {-1,+1}, both classes in each split.
  void validate() const;
};

/// Scans `root` (directory-per-class, or flat FSDD-style
/// {digit}_{speaker}_{index}.wav names) and builds a balanced one-vs-rest
/// task for `target`.
DatasetManifest build_manifest(const std::string& root, const std::string& target, std::uint64_t seed,
                               double train_frac = 0.8);

/// JSON lines: one header object, then one object per entry.
std::string render_manifest(const DatasetManifest& m);
DatasetManifest parse_manifest(const std::string& text);
void write_manifest(const std::string& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::string& path);

/// Class names found under `root`, sorted.
std::vector<std::string> list_classes(const std::string& root);

}  // namespace infilter
