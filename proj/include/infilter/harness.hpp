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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "infilter/audio.hpp"
#include "infilter/cochlea.hpp"
#include "infilter/fixedpoint.hpp"
#include "infilter/kernels.hpp"
#include "infilter/manifest.hpp"
#include "infilter/svm.hpp"

namespace infilter {

enum class Mode { kFloat, kFixed };
Mode parse_mode(const std::string& s);
std::string mode_name(Mode m);

struct ExperimentConfig {
  CochleaConfig cochlea = CochleaConfig::defaults();
  std::vector<double> C_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
  int cv_folds = 5;
  std::uint64_t seed = 1;
  std::string manifest;
  Mode mode = Mode::kFloat;
  std::string sweep_axis;  // "P" or "snr_db"; empty when not sweeping
  std::vector<double> sweep_values;
  double trim_db = -40.0;
  double trim_window_ms = 20.0;
  DatapathFormats formats;
  TemplateSolverOptions solver;
  std::string cache_dir;  // empty disables the feature cache

  void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Clips of one split after decode, resample to the bank rate, trim and
// framing. Window w belongs to clip clip_of_window[w]. Splits rebuilt from a
// feature table carry no windows.
struct PreparedSplit {
  std::vector<std::string> clip_paths;
  std::vector<int> clip_labels;
  std::vector<kernels::Window> windows;
  std::vector<int> clip_of_window;

  Eigen::VectorXd window_labels() const;
  std::size_t num_clips() const { return clip_paths.size(); }
};

struct NoiseSpec {
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

/// Loads the trimmed clips of `split` (decode runs in parallel).
std::vector<Clip> load_clips(const DatasetManifest& m, const std::string& split, const ExperimentConfig& cfg);

/// Frames clips into windows, optionally adding noise to each trimmed clip
/// with a seed derived from the clip path.
PreparedSplit prepare_split(const std::vector<Clip>& clips, const ExperimentConfig& cfg,
                            const std::optional<NoiseSpec>& noise = std::nullopt);

// Per-clip accumulations, content addressed by (bank, clip samples, mode).
class FeatureCache {
 public:
  explicit FeatureCache(std::string dir) : dir_(std::move(dir)) {}
  std::string key(const std::string& bank_id, const std::vector<kernels::Window>& windows, Mode mode) const;
  std::optional<Eigen::MatrixXd> load(const std::string& key) const;
  void store(const std::string& key, const Eigen::MatrixXd& rows) const;
  bool enabled() const { return !dir_.empty(); }

 private:
  std::string dir_;
};

/// Window accumulations in real units (fixed mode dequantizes the integer
/// accumulator words). Rows follow split.windows.
Eigen::MatrixXd accumulate_split(const PreparedSplit& split, const FilterBank& bank, Mode mode,
                                 const DatapathFormats& fmts, const FeatureCache* cache = nullptr,
                                 DatapathStats* stats = nullptr);

// Output of the featurize step: accumulations for both splits plus the bank
// that produced them.
struct FeatureTable {
  FilterBank bank;
  Mode mode = Mode::kFloat;
  PreparedSplit train, test;
  Eigen::MatrixXd train_accum, test_accum;
};

FeatureTable featurize_manifest(const DatasetManifest& m, const FilterBank& bank, Mode mode,
                                const ExperimentConfig& cfg);
nlohmann::json feature_table_to_json(const FeatureTable& t);
FeatureTable feature_table_from_json(const nlohmann::json& j);

struct Confusion {
  std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
  std::size_t total() const { return tp + fn + fp + tn; }
  double accuracy() const;  // percent
};

/// Majority vote of window signs; ties go to the sign of the decision sum.
int vote(std::span<const double> window_decisions);

struct SplitScore {
  Confusion confusion;
  std::vector<double> window_decisions;  // fixed mode: integer sums as doubles
};

SplitScore score_float(const TemplateModel& model, const Eigen::MatrixXd& accum, const PreparedSplit& split);
SplitScore score_fixed(const QuantizedModel& model, const PreparedSplit& split, DatapathStats* stats = nullptr);

/// Cross-validates C over cfg.C_grid (skipped for a single value), then fits
/// on all training windows. Records clip-level training accuracy.
TemplateModel fit_model(const Eigen::MatrixXd& train_accum, const PreparedSplit& train, const FilterBank& bank,
                        const ExperimentConfig& cfg, CvResult* cv = nullptr);

struct EvalReport {
  std::string mode;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  Confusion train_confusion;
  Confusion test_confusion;
  std::size_t num_templates = 0;
  std::uint64_t macs_per_decision = 0;
  SolverReport solver;
  double C = 0.0;
  double runtime_seconds = 0.0;
  double window_agreement = -1.0;  // float vs fixed sign agreement, fixed mode only
  std::uint64_t saturations = 0;
};

nlohmann::json eval_report_to_json(const EvalReport& r);

/// Trains from a feature table (C chosen as in fit_model).
TemplateModel train_from_table(const FeatureTable& t, const ExperimentConfig& cfg, CvResult* cv = nullptr);

/// Scores an existing model on both splits of a manifest.
EvalReport evaluate(const TemplateModel& model, const DatasetManifest& m, const ExperimentConfig& cfg);

/// Design, featurize, train and evaluate in one go.
struct ExperimentResult {
  TemplateModel model;
  EvalReport report;
};
ExperimentResult run_experiment(const DatasetManifest& m, const ExperimentConfig& cfg);

struct FilterSweepRow {
  int P = 0;
  double train_acc = 0.0, test_acc = 0.0;
  std::string status;  // "ok" or the error text
};
std::vector<FilterSweepRow> sweep_filters(const DatasetManifest& m, const ExperimentConfig& cfg,
                                          const std::vector<int>& P_values);
std::string filter_sweep_csv(const std::vector<FilterSweepRow>& rows);

struct SnrSweepRow {
  double snr_db = 0.0;
  bool augment = false;
  int repeats = 0;
  double mean_test_acc = 0.0, var_test_acc = 0.0;
};
std::vector<SnrSweepRow> sweep_snr(const DatasetManifest& m, const ExperimentConfig& cfg,
                                   const std::vector<double>& snr_values, bool augment, int repeats);
std::string snr_sweep_csv(const std::vector<SnrSweepRow>& rows);

struct BaselineRow {
  std::string task;
  std::size_t S = 0, P = 0;
  std::uint64_t baseline_macs = 0, template_macs = 0;
  double baseline_train_acc = 0.0, baseline_test_acc = 0.0;
  double template_train_acc = 0.0, template_test_acc = 0.0;
};
/// Trains both models on identical standardized features. C <= 0 selects C
/// for the template by cross-validation and reuses it for the baseline.
BaselineRow compare_baseline(const DatasetManifest& m, const ExperimentConfig& cfg, double C,
                             const KernelSpec& kernel);
std::string baseline_csv(const std::vector<BaselineRow>& rows);

}  // namespace infilter
