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

// Dense kernels behind the expression evaluator.
//
// Every kernel exists twice: a plain serial reference in `serial::` and an
// OpenMP version in `omp::`. Both accumulate each output element in the same
// order, so their results are bit-identical at any thread count; the tests
// and the benchmark rely on that. The unqualified entry points dispatch to
// `omp::` only when more than one thread is configured and the problem is
// large enough to amortise the fork.

#pragma once

#include <cstddef>
#include <span>

namespace logan::kernels {

void set_num_threads(int n);
int num_threads();

/// Work size (in multiply-adds or elements) below which dispatch stays serial.
inline constexpr std::size_t kParallelThreshold = 16384;

namespace serial {
/// out[m x n] = a[m x k] * b[k x n]
void matmul(std::span<const double> a, std::span<const double> b,
            std::span<double> out, std::size_t m, std::size_t k, std::size_t n);
void transpose(std::span<const double> a, std::span<double> out, std::size_t m,
               std::size_t n);
/// out[m] = sum over columns of a[m x n]
void row_sum(std::span<const double> a, std::span<double> out, std::size_t m,
             std::size_t n);
/// out[n] = sum over rows of a[m x n]
void col_sum(std::span<const double> a, std::span<double> out, std::size_t m,
             std::size_t n);
}  // namespace serial

namespace omp {
void matmul(std::span<const double> a, std::span<const double> b,
            std::span<double> out, std::size_t m, std::size_t k, std::size_t n);
void transpose(std::span<const double> a, std::span<double> out, std::size_t m,
               std::size_t n);
void row_sum(std::span<const double> a, std::span<double> out, std::size_t m,
             std::size_t n);
void col_sum(std::span<const double> a, std::span<double> out, std::size_t m,
             std::size_t n);
}  // namespace omp

void matmul(std::span<const double> a, std::span<const double> b,
            std::span<double> out, std::size_t m, std::size_t k, std::size_t n);
void transpose(std::span<const double> a, std::span<double> out, std::size_t m,
               std::size_t n);
void row_sum(std::span<const double> a, std::span<double> out, std::size_t m,
             std::size_t n);
void col_sum(std::span<const double> a, std::span<double> out, std::size_t m,
             std::size_t n);

/// out[i] = f(in[i])
template <typename F>
void map(std::span<const double> in, std::span<double> out, F f) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(in.size());
  const bool par = num_threads() > 1 && in.size() >= kParallelThreshold;
#pragma omp parallel for if (par) num_threads(num_threads()) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = f(in[i]);
}

/// out[i] = f(a[i], b[i]); an operand of length one is broadcast.
template <typename F>
void zip(std::span<const double> a, std::span<const double> b,
         std::span<double> out, F f) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(out.size());
  const bool par = num_threads() > 1 && out.size() >= kParallelThreshold;
  const bool sa = a.size() == 1, sb = b.size() == 1;
#pragma omp parallel for if (par) num_threads(num_threads()) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = f(a[sa ? 0 : i], b[sb ? 0 : i]);
  }
}

}  // namespace logan::kernels
