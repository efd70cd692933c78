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

#include <doctest.h>

#include "infilter/kernels.hpp"
#include "oracles.hpp"

using namespace infilter;
using namespace infilter::kernels;

namespace {

std::vector<Window> windows(int count, int W) {
  std::vector<Window> out;
  for (int i = 0; i < count; ++i) out.push_back(oracle::test_pcm(static_cast<std::size_t>(W), static_cast<std::uint64_t>(i + 1)));
  return out;
}

}  // namespace

TEST_CASE("serial and parallel kernels agree") {
  CochleaConfig c = CochleaConfig::defaults(16000.0, 12);
  c.window_len = 800;
  const auto bank = design_filterbank(c);
  const auto w = windows(7, 800);

  const auto fs = accumulate_batch_serial(bank, w);
  const auto fp = accumulate_batch_parallel(bank, w);
  CHECK(fs.rows() == 7);
  CHECK(fs.cols() == 12);
  CHECK(fs == fp);

  const auto qb = quantize_bank(bank, DatapathFormats{});
  const auto xs = fx_accumulate_batch_serial(qb, w);
  const auto xp = fx_accumulate_batch_parallel(qb, w);
  CHECK(xs.accum == xp.accum);
  CHECK(xs.stats.total() == xp.stats.total());
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(xs.accum[i] == fx_accumulate(w[i], qb));

  const Eigen::MatrixXd F = fs / fs.maxCoeff();
  CHECK(gram_outer_serial(F).isApprox(gram_outer_parallel(F), 1e-14));
  CHECK(gram_outer_serial(F).isApprox(F * F.transpose(), 1e-12));
  for (const auto& k : {KernelSpec{}, KernelSpec{KernelKind::kRbf, 0.5}}) {
    CHECK(kernel_matrix_serial(F, k) == kernel_matrix_parallel(F, k));
  }
  const auto K = kernel_matrix_serial(F, KernelSpec{KernelKind::kRbf, 0.5});
  CHECK(K(2, 5) == doctest::Approx(std::exp(-0.5 * (F.row(2) - F.row(5)).squaredNorm())));
}

TEST_CASE("batch rejects windows of the wrong length") {
  CochleaConfig c = CochleaConfig::defaults(16000.0, 4);
  c.window_len = 100;
  const auto bank = design_filterbank(c);
  auto w = windows(2, 100);
  w[1].pop_back();
  CHECK_THROWS_AS(accumulate_batch_serial(bank, w), InputError);
  CHECK_THROWS_AS(accumulate_batch_parallel(bank, w), InputError);
}
