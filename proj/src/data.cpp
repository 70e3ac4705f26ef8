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

#include "logan/data.hpp"

#include <cmath>
#include <numbers>

#include "logan/errors.hpp"

namespace logan {

const char* data_kind_name(DataKind k) {
  switch (k) {
    case DataKind::kRing: return "ring";
    case DataKind::kGrid: return "grid";
    case DataKind::kTable: return "table";
  }
  return "?";
}

DataKind parse_data_kind(const std::string& name) {
  for (auto k : {DataKind::kRing, DataKind::kGrid, DataKind::kTable}) {
    if (name == data_kind_name(k)) return k;
  }
  throw ConfigError("unknown data kind '" + name + "' (expected ring, grid or table)");
}

void DataDistribution::validate() const {
  if (centers.empty()) throw ConfigError("data distribution needs at least one mode");
  for (const auto& c : centers) {
    if (c.size() != centers.front().size() || c.empty()) {
      throw ConfigError("data mode centers must share one positive dimension");
    }
  }
  if (!(stddev > 0.0)) throw ConfigError("data stddev must be positive");
}

DataDistribution DataDistribution::ring(std::size_t modes, double radius, double stddev) {
  DataDistribution d;
  d.kind = DataKind::kRing;
  d.stddev = stddev;
  for (std::size_t i = 0; i < modes; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(modes);
    d.centers.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  d.validate();
  return d;
}

DataDistribution DataDistribution::grid(std::size_t side, double spacing, double stddev) {
  DataDistribution d;
  d.kind = DataKind::kGrid;
  d.stddev = stddev;
  const double half = 0.5 * static_cast<double>(side - 1);
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      d.centers.push_back({spacing * (static_cast<double>(i) - half),
                           spacing * (static_cast<double>(j) - half)});
    }
  }
  d.validate();
  return d;
}

DataDistribution DataDistribution::table(std::vector<std::vector<double>> centers, double stddev) {
  DataDistribution d;
  d.kind = DataKind::kTable;
  d.centers = std::move(centers);
  d.stddev = stddev;
  d.validate();
  return d;
}

Tensor DataDistribution::sample(Rng& rng, std::size_t n) const {
  const std::size_t k = dim();
  std::vector<double> v(n * k);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& c = centers[rng.index(centers.size())];
    for (std::size_t j = 0; j < k; ++j) v[r * k + j] = c[j] + stddev * rng.normal();
  }
  return Tensor({n, k}, std::move(v));
}

}  // namespace logan
