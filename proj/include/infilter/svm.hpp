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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "infilter/cochlea.hpp"
#include "infilter/error.hpp"

namespace infilter {

/// Counts multiplies actually executed by a decision routine.
struct MacCounter {
  std::uint64_t macs = 0;
};

struct TrainingSet {
  Eigen::MatrixXd features;  // M x P, one row per example
  Eigen::VectorXd labels;    // +1 / -1

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
  void validate() const;
};

struct SolverReport {
  std::string method;
  long iterations = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;       // maximal violating pair gap
  double equality_residual = 0.0;  // |sum alpha y|
  double reconstruction_residual = 0.0;
  double wall_seconds = 0.0;
  bool converged = false;
  bool bias_fallback = false;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, SolverReport report)
      : Error(what), report_(std::move(report)) {}
  const SolverReport& report() const noexcept { return report_; }
  const char* kind() const noexcept override { return "solver"; }

 private:
  SolverReport report_;
};

struct TemplateModel {
  Eigen::VectorXd Q;
  double b = 0.0;
  Eigen::VectorXd alpha;
  double C = 1.0;
  Standardizer standardizer;
  std::optional<FilterBank> bank;
  SolverReport report;
  double train_accuracy = -1.0;  // percent, clip level; negative when unknown

  std::size_t dim() const { return static_cast<std::size_t>(Q.size()); }
};

/// Template decision sum: one multiply-accumulate per channel.
double decision(std::span<const double> phi, const TemplateModel& model, MacCounter* macs = nullptr);

/// sgn with sgn(0) = +1.
inline int sign_label(double f) { return f >= 0.0 ? 1 : -1; }

inline int classify(std::span<const double> phi, const TemplateModel& model) {
  return sign_label(decision(phi, model));
}

/// Outer-product kernel matrix F F^T.
Eigen::MatrixXd gram_outer(const Eigen::MatrixXd& F);

struct TemplateSolverOptions {
  double tol = 1e-6;
  long max_iterations = 2'000'000;
  int check_every = 16;
};

struct TemplateFit {
  TemplateModel model;
  SolverReport report;
};

/// Minimizes 1/2 |Q|^2 - sum(alpha) with Q tied to alpha through the
/// features, sum(alpha y) = 0 and 0 <= alpha <= C.
TemplateFit train_template(const TrainingSet& data, double C, const TemplateSolverOptions& opts = {});

/// Maximal violating pair gap of the dual at alpha, given the dual gradient.
double kkt_gap(const Eigen::VectorXd& alpha, const Eigen::VectorXd& grad,
               const Eigen::VectorXd& y, double C);

enum class KernelKind { kLinear, kRbf };

struct KernelSpec {
  KernelKind kind = KernelKind::kLinear;
  double gamma = 0.0;  // rbf bandwidth; 0 means 1 / P

  double eval(std::span<const double> a, std::span<const double> b) const;
  std::string name() const;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct BaselineModel {
  RowMatrix support_vectors;  // S x P
  Eigen::VectorXd sv_labels;
  Eigen::VectorXd sv_alpha;
  double b = 0.0;
  double C = 1.0;
  KernelSpec kernel;
  SolverReport report;

  std::size_t num_sv() const { return static_cast<std::size_t>(support_vectors.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(support_vectors.cols()); }
  /// Multiply-accumulates of the kernel expansion: S * P.
  std::size_t mac_count() const { return num_sv() * dim(); }
};

struct BaselineSolverOptions {
  double tol = 1e-3;
  long max_iterations = 10'000'000;
};

/// Conventional dual SVM by sequential minimal optimization with
/// second-order working-set selection.
BaselineModel train_baseline(const TrainingSet& data, double C, const KernelSpec& kernel,
                             const BaselineSolverOptions& opts = {});

double decision(std::span<const double> x, const BaselineModel& model, MacCounter* macs = nullptr);

struct CvResult {
  double best_C = 0.0;
  std::vector<double> grid;                     // deduplicated, ascending
  std::vector<std::vector<double>> fold_accuracy;  // [grid][fold], percent
  std::vector<double> mean_accuracy;
};

/// Stratified k-fold selection of C; ties go to the smaller C.
CvResult cross_validate(const TrainingSet& data, std::vector<double> C_grid, int folds,
                        std::uint64_t seed, const TemplateSolverOptions& opts = {});

/// Percent of rows whose template decision sign matches the label.
double accuracy(const TemplateModel& model, const Eigen::MatrixXd& F, const Eigen::VectorXd& y);

}  // namespace infilter
