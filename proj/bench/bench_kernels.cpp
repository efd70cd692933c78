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

#include <benchmark/benchmark.h>

#include "infilter/kernels.hpp"
#include "infilter/random.hpp"

using namespace infilter;

namespace {

std::vector<kernels::Window> make_windows(int n, int W) {
  SplitMix64 g(7);
  std::vector<kernels::Window> out(static_cast<std::size_t>(n), kernels::Window(static_cast<std::size_t>(W)));
  for (auto& w : out) {
    for (auto& s : w) s = static_cast<std::int16_t>(4000.0 * g.gaussian());
  }
  return out;
}

Eigen::MatrixXd make_features(int M, int P) {
  SplitMix64 g(11);
  Eigen::MatrixXd F(M, P);
  for (int i = 0; i < M; ++i) {
    for (int p = 0; p < P; ++p) F(i, p) = g.gaussian();
  }
  return F;
}

const FilterBank& bank() {
  static const FilterBank b = design_filterbank(CochleaConfig::defaults());
  return b;
}

const QuantizedBank& qbank() {
  static const QuantizedBank q = quantize_bank(bank(), DatapathFormats{});
  return q;
}

template <auto Fn>
void BM_Accumulate(benchmark::State& state) {
  const auto windows = make_windows(static_cast<int>(state.range(0)), bank().config().window_len);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(bank(), windows));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void BM_FxAccumulate(benchmark::State& state) {
  const auto windows = make_windows(static_cast<int>(state.range(0)), bank().config().window_len);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(qbank(), windows));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void BM_Gram(benchmark::State& state) {
  const auto F = make_features(static_cast<int>(state.range(0)), 30);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(F));
}

template <auto Fn>
void BM_RbfMatrix(benchmark::State& state) {
  const auto F = make_features(static_cast<int>(state.range(0)), 30);
  const KernelSpec k{KernelKind::kRbf, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(Fn(F, k));
}

}  // namespace

BENCHMARK(BM_Accumulate<kernels::accumulate_batch_serial>)->Name("accumulate/serial")->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Accumulate<kernels::accumulate_batch_parallel>)->Name("accumulate/parallel")->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FxAccumulate<kernels::fx_accumulate_batch_serial>)->Name("fx_accumulate/serial")->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FxAccumulate<kernels::fx_accumulate_batch_parallel>)->Name("fx_accumulate/parallel")->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Gram<kernels::gram_outer_serial>)->Name("gram_outer/serial")->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gram<kernels::gram_outer_parallel>)->Name("gram_outer/parallel")->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RbfMatrix<kernels::kernel_matrix_serial>)->Name("rbf_matrix/serial")->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RbfMatrix<kernels::kernel_matrix_parallel>)->Name("rbf_matrix/parallel")->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
