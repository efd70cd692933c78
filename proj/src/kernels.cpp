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

#include "infilter/kernels.hpp"

#include <omp.h>

#include "infilter/error.hpp"

namespace infilter::kernels {

namespace {

void check_windows(const std::vector<Window>& windows, int W) {
  for (const auto& w : windows) {
    if (w.size() != static_cast<std::size_t>(W)) throw InputError("batch window length differs from W");
  }
}

std::vector<double> row_of(const Eigen::MatrixXd& F, Eigen::Index i) {
  std::vector<double> r(static_cast<std::size_t>(F.cols()));
  for (Eigen::Index p = 0; p < F.cols(); ++p) r[static_cast<std::size_t>(p)] = F(i, p);
  return r;
}

}  // namespace

Eigen::MatrixXd gram_outer_serial(const Eigen::MatrixXd& F) {
  const Eigen::Index M = F.rows();
  Eigen::MatrixXd K(M, M);
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      double s = 0.0;
      for (Eigen::Index p = 0; p < F.cols(); ++p) s += F(i, p) * F(j, p);
      K(i, j) = K(j, i) = s;
    }
  }
  return K;
}

Eigen::MatrixXd gram_outer_parallel(const Eigen::MatrixXd& F) {
  const Eigen::Index M = F.rows();
  const Eigen::MatrixXd Ft = F.transpose();  // columns are examples
  Eigen::MatrixXd K(M, M);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      // Same summation order as the serial reference.
      double s = 0.0;
      for (Eigen::Index p = 0; p < Ft.rows(); ++p) s += Ft(p, i) * Ft(p, j);
      K(i, j) = s;
      K(j, i) = s;
    }
  }
  return K;
}

Eigen::MatrixXd kernel_matrix_serial(const Eigen::MatrixXd& F, const KernelSpec& kernel) {
  const Eigen::Index M = F.rows();
  Eigen::MatrixXd K(M, M);
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < M; ++i) rows.push_back(row_of(F, i));
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      K(i, j) = K(j, i) = kernel.eval(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
    }
  }
  return K;
}

Eigen::MatrixXd kernel_matrix_parallel(const Eigen::MatrixXd& F, const KernelSpec& kernel) {
  const Eigen::Index M = F.rows();
  Eigen::MatrixXd K(M, M);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(M));
#pragma omp parallel for
  for (Eigen::Index i = 0; i < M; ++i) rows[static_cast<std::size_t>(i)] = row_of(F, i);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel.eval(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

Eigen::MatrixXd accumulate_batch_serial(const FilterBank& bank, const std::vector<Window>& windows) {
  check_windows(windows, bank.config().window_len);
  Eigen::MatrixXd S(static_cast<Eigen::Index>(windows.size()), static_cast<Eigen::Index>(bank.size()));
  for (std::size_t n = 0; n < windows.size(); ++n) {
    const auto s = accumulate_window(bank, pcm_to_real(windows[n]));
    for (std::size_t p = 0; p < s.size(); ++p) S(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p)) = s[p];
  }
  return S;
}

Eigen::MatrixXd accumulate_batch_parallel(const FilterBank& bank, const std::vector<Window>& windows) {
  check_windows(windows, bank.config().window_len);
  const auto N = static_cast<std::int64_t>(windows.size());
  Eigen::MatrixXd S(N, static_cast<Eigen::Index>(bank.size()));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t n = 0; n < N; ++n) {
    const auto s = accumulate_window(bank, pcm_to_real(windows[static_cast<std::size_t>(n)]));
    for (std::size_t p = 0; p < s.size(); ++p) S(n, static_cast<Eigen::Index>(p)) = s[p];
  }
  return S;
}

FixedBatch fx_accumulate_batch_serial(const QuantizedBank& bank, const std::vector<Window>& windows) {
  check_windows(windows, bank.config().window_len);
  FixedBatch out;
  for (const auto& w : windows) out.accum.push_back(fx_accumulate(w, bank, &out.stats));
  return out;
}

FixedBatch fx_accumulate_batch_parallel(const QuantizedBank& bank, const std::vector<Window>& windows) {
  check_windows(windows, bank.config().window_len);
  const auto N = static_cast<std::int64_t>(windows.size());
  FixedBatch out;
  out.accum.resize(windows.size());
  std::vector<DatapathStats> stats(windows.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t n = 0; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    out.accum[i] = fx_accumulate(windows[i], bank, &stats[i]);
  }
  for (const auto& s : stats) {
    out.stats.state_saturations += s.state_saturations;
    out.stats.accumulator_saturations += s.accumulator_saturations;
  }
  return out;
}

}  // namespace infilter::kernels
