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

// Desk-scale data distributions: isotropic Gaussian mixtures.

#pragma once

#include <string>
#include <vector>

#include "logan/rng.hpp"
#include "logan/tensor.hpp"

namespace logan {

enum class DataKind { kRing, kGrid, kTable };

const char* data_kind_name(DataKind k);
DataKind parse_data_kind(const std::string& name);

struct DataDistribution {
  DataKind kind = DataKind::kRing;
  std::vector<std::vector<double>> centers;
  double stddev = 0.02;

  std::size_t dim() const { return centers.empty() ? 0 : centers.front().size(); }
  void validate() const;

  /// `modes` centers evenly spaced on a circle of `radius`.
  static DataDistribution ring(std::size_t modes = 8, double radius = 2.0, double stddev = 0.02);
  /// side x side centers on a square lattice with `spacing`, centered at 0.
  static DataDistribution grid(std::size_t side = 5, double spacing = 2.0, double stddev = 0.02);
  static DataDistribution table(std::vector<std::vector<double>> centers, double stddev);

  /// n rows: a uniformly chosen mode plus isotropic Gaussian noise.
  Tensor sample(Rng& rng, std::size_t n) const;
};

}  // namespace logan
