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
#include <exception>
#include <string>

#include "infilter/random.hpp"
#include "infilter/svm.hpp"

namespace infilter {

CvResult cross_validate(const TrainingSet& data, std::vector<double> C_grid, int folds, std::uint64_t seed,
                        const TemplateSolverOptions& opts) {
  data.validate();
  if (folds < 2) throw InputError("cross_validate: need at least two folds");
  if (C_grid.empty()) throw InputError("cross_validate: empty C grid");
  for (double c : C_grid) {
    if (!(c > 0.0)) throw InputError("cross_validate: C values must be positive");
  }
  std::sort(C_grid.begin(), C_grid.end());
  C_grid.erase(std::unique(C_grid.begin(), C_grid.end()), C_grid.end());

  // Stratified assignment: shuffle each class, then deal round-robin.
  const Eigen::Index M = data.size();
  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index i = 0; i < M; ++i) (data.labels[i] > 0 ? pos : neg).push_back(i);
  if (pos.size() < static_cast<std::size_t>(folds) || neg.size() < static_cast<std::size_t>(folds)) {
    throw InputError("cross_validate: each class needs at least one example per fold");
  }
  SplitMix64 rng(seed);
  rng.shuffle(std::span<Eigen::Index>(pos));
  rng.shuffle(std::span<Eigen::Index>(neg));
  std::vector<int> fold_of(static_cast<std::size_t>(M));
  std::size_t k = 0;
  for (auto i : pos) fold_of[static_cast<std::size_t>(i)] = static_cast<int>(k++ % static_cast<std::size_t>(folds));
  for (auto i : neg) fold_of[static_cast<std::size_t>(i)] = static_cast<int>(k++ % static_cast<std::size_t>(folds));

  const auto n_tasks = static_cast<std::int64_t>(C_grid.size()) * folds;
  std::vector<double> acc(static_cast<std::size_t>(n_tasks), 0.0);
  std::vector<std::string> errors(static_cast<std::size_t>(n_tasks));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t task = 0; task < n_tasks; ++task) {
    const auto ci = static_cast<std::size_t>(task / folds);
    const int f = static_cast<int>(task % folds);
    try {
      std::vector<Eigen::Index> tr, va;
      for (Eigen::Index i = 0; i < M; ++i) (fold_of[static_cast<std::size_t>(i)] == f ? va : tr).push_back(i);
      TrainingSet train{data.features(tr, Eigen::all), data.labels(tr)};
      const auto fit = train_template(train, C_grid[ci], opts);
      acc[static_cast<std::size_t>(task)] = accuracy(fit.model, data.features(va, Eigen::all), data.labels(va));
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(task)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error("cross_validate: " + e);
  }

  CvResult res;
  res.grid = C_grid;
  res.fold_accuracy.resize(C_grid.size());
  double best = -1.0;
  for (std::size_t ci = 0; ci < C_grid.size(); ++ci) {
    double sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      const double a = acc[ci * static_cast<std::size_t>(folds) + static_cast<std::size_t>(f)];
      res.fold_accuracy[ci].push_back(a);
      sum += a;
    }
    res.mean_accuracy.push_back(sum / folds);
    if (res.mean_accuracy.back() > best) {
      best = res.mean_accuracy.back();
      res.best_C = C_grid[ci];
    }
  }
  return res;
}

}  // namespace infilter
