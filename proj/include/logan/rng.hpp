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

// Deterministic random source with a serialisable state.
//
// Draws are derived from the raw 64-bit engine output by fixed formulas, so
// streams are identical across standard libraries and survive a checkpoint
// round trip bit-exactly.

#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace logan {

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal by Box-Muller. Consumes two draws, caches nothing.
  double normal();
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  std::string state() const;
  void set_state(const std::string& text);

 private:
  std::mt19937_64 engine_;
};

/// Stable per-cell seed: splitmix64 of the master seed mixed with `index`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace logan
