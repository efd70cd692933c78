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

// Data-parallel kernels. Each OpenMP kernel has a serial twin with the same
// contract; the serial versions are the reference the tests and benchmarks
// compare against. Results never depend on the thread count.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "infilter/cochlea.hpp"
#include "infilter/fixedpoint.hpp"
#include "infilter/svm.hpp"

namespace infilter::kernels {

using Window = std::vector<std::int16_t>;

Eigen::MatrixXd gram_outer_serial(const Eigen::MatrixXd& F);
Eigen::MatrixXd gram_outer_parallel(const Eigen::MatrixXd& F);

Eigen::MatrixXd kernel_matrix_serial(const Eigen::MatrixXd& F, const KernelSpec& kernel);
Eigen::MatrixXd kernel_matrix_parallel(const Eigen::MatrixXd& F, const KernelSpec& kernel);

/// Float accumulations, one row per window (windows must be W long).
Eigen::MatrixXd accumulate_batch_serial(const FilterBank& bank, const std::vector<Window>& windows);
Eigen::MatrixXd accumulate_batch_parallel(const FilterBank& bank, const std::vector<Window>& windows);

struct FixedBatch {
  std::vector<std::vector<std::int64_t>> accum;  // raw accumulator words
  DatapathStats stats;
};

FixedBatch fx_accumulate_batch_serial(const QuantizedBank& bank, const std::vector<Window>& windows);
FixedBatch fx_accumulate_batch_parallel(const QuantizedBank& bank, const std::vector<Window>& windows);

}  // namespace infilter::kernels
