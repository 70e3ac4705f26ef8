// Copyright 2026 The LOGAN Lab Authors.
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

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "logan/kernels.hpp"

namespace {

std::vector<double> random_vec(std::size_t n) {
  std::mt19937_64 rng(n);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_MatmulSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto a = random_vec(n * n), b = random_vec(n * n);
  std::vector<double> out(n * n);
  for (auto _ : state) {
    logan::kernels::serial::matmul(a, b, out, n, n, n);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}

void BM_MatmulOmp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  logan::kernels::set_num_threads(static_cast<int>(state.range(1)));
  auto a = random_vec(n * n), b = random_vec(n * n);
  std::vector<double> out(n * n);
  for (auto _ : state) {
    logan::kernels::omp::matmul(a, b, out, n, n, n);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
  logan::kernels::set_num_threads(1);
}

void BM_ColSumSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto a = random_vec(n * n);
  std::vector<double> out(n);
  for (auto _ : state) {
    logan::kernels::serial::col_sum(a, out, n, n);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_ColSumOmp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  logan::kernels::set_num_threads(static_cast<int>(state.range(1)));
  auto a = random_vec(n * n);
  std::vector<double> out(n);
  for (auto _ : state) {
    logan::kernels::omp::col_sum(a, out, n, n);
    benchmark::DoNotOptimize(out.data());
  }
  logan::kernels::set_num_threads(1);
}

BENCHMARK(BM_MatmulSerial)->Arg(64)->Arg(256);
BENCHMARK(BM_MatmulOmp)->Args({64, 1})->Args({64, 4})->Args({256, 1})->Args({256, 4});
BENCHMARK(BM_ColSumSerial)->Arg(512)->Arg(2048);
BENCHMARK(BM_ColSumOmp)->Args({512, 1})->Args({512, 4})->Args({2048, 1})->Args({2048, 4});

}  // namespace

BENCHMARK_MAIN();
