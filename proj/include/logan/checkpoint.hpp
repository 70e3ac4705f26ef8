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

// Binary training checkpoints.
//
// Layout, all integers and reals little-endian:
//   "LOGN"                      magic
//   u32                         format version
//   u32 n, n bytes              architecture descriptor (JSON text)
//   arrays theta_G, theta_D     see below
//   u64 t, arrays v_G, v_D      optimiser state (empty arrays for SGD)
//   u32 n, n bytes              RNG state (text form of the engine)
//   u64                         step
// An array list is u32 count, then per tensor: u32 rank, u64 dims[rank],
// u64 length, length x f64 in row-major order.

#pragma once

#include <cstdint>
#include <string>

#include "logan/trainer.hpp"

namespace logan {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const TrainState& state);
/// Throws CheckpointError on bad magic, version mismatch or truncation.
TrainState decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const TrainState& state);
TrainState load_checkpoint(const std::string& path);

}  // namespace logan
