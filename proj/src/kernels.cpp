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

#include "logan/kernels.hpp"

#include <algorithm>
#include <atomic>

namespace logan::kernels {

namespace {
std::atomic<int> g_threads{1};
}  // namespace

void set_num_threads(int n) { g_threads.store(std::max(1, n)); }
int num_threads() { return g_threads.load(std::memory_order_relaxed); }

namespace serial {

void matmul(std::span<const double> a, std::span<const double> b,
            std::span<double> out, std::size_t m, std::size_t k,
            std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      out[i * n + j] = acc;
    }
  }
}

void transpose(std::span<const double> a, std::span<double> out,
               std::size_t m, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
}

void row_sum(std::span<const double> a, std::span<double> out, std::size_t m,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += a[i * n + j];
    out[i] = acc;
  }
}

void col_sum(std::span<const double> a, std::span<double> out, std::size_t m,
             std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += a[i * n + j];
    out[j] = acc;
  }
}

}  // namespace serial

namespace omp {

// Row-blocked i-p-j order: out[i][j] still accumulates over p ascending from
// 0.0, matching serial::matmul bit for bit.
void matmul(std::span<const double> a, std::span<const double> b,
            std::span<double> out, std::size_t m, std::size_t k,
            std::size_t n) {
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for num_threads(num_threads()) schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    double* orow = out.data() + i * n;
    std::fill(orow, orow + n, 0.0);
    const double* arow = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

void transpose(std::span<const double> a, std::span<double> out,
               std::size_t m, std::size_t n) {
  const auto cols = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for num_threads(num_threads()) schedule(static)
  for (std::ptrdiff_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < m; ++i) out[j * m + i] = a[i * n + j];
}

void row_sum(std::span<const double> a, std::span<double> out, std::size_t m,
             std::size_t n) {
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for num_threads(num_threads()) schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += a[i * n + j];
    out[i] = acc;
  }
}

void col_sum(std::span<const double> a, std::span<double> out, std::size_t m,
             std::size_t n) {
  const auto cols = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for num_threads(num_threads()) schedule(static)
  for (std::ptrdiff_t j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += a[i * n + j];
    out[j] = acc;
  }
}

}  // namespace omp

namespace {
bool go_parallel(std::size_t work) {
  return num_threads() > 1 && work >= kParallelThreshold;
}
}  // namespace

void matmul(std::span<const double> a, std::span<const double> b,
            std::span<double> out, std::size_t m, std::size_t k,
            std::size_t n) {
  if (go_parallel(m * k * n)) {
    omp::matmul(a, b, out, m, k, n);
  } else {
    serial::matmul(a, b, out, m, k, n);
  }
}

void transpose(std::span<const double> a, std::span<double> out,
               std::size_t m, std::size_t n) {
  if (go_parallel(m * n)) {
    omp::transpose(a, out, m, n);
  } else {
    serial::transpose(a, out, m, n);
  }
}

void row_sum(std::span<const double> a, std::span<double> out, std::size_t m,
             std::size_t n) {
  if (go_parallel(m * n)) {
    omp::row_sum(a, out, m, n);
  } else {
    serial::row_sum(a, out, m, n);
  }
}

void col_sum(std::span<const double> a, std::span<double> out, std::size_t m,
             std::size_t n) {
  if (go_parallel(m * n)) {
    omp::col_sum(a, out, m, n);
  } else {
    serial::col_sum(a, out, m, n);
  }
}

}  // namespace logan::kernels
