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

// Run configuration schema. Configs are JSON objects; every key is
// optional except "seed", and unknown keys are rejected with their path.
//
//   {
//     "seed": 1, "run_id": "ring", "output_dir": "", "profile": "small",
//     "train":  {"batch", "steps", "optimiser", "lr_d", "lr_g", "loss",
//                "latent_enabled", "alternating", "latent_dim", "g_hidden",
//                "d_hidden", "slope", "metrics_interval", "eval_interval",
//                "checkpoint_interval",
//                "ablation": {"block_d_term", "block_g_term"}},
//     "latent": {"method", "alpha", "beta", "w_r", "c", "steps",
//                "eval_steps", "clip"},
//     "data":   {"kind", "modes", "radius", "side", "spacing", "std",
//                "centers"},
//     "eval":   {"samples", "reference_samples", "radius", "seed",
//                "truncation", "steps"},
//     "sweep":  {"alpha", "beta", "w_r", "c", "replicates"}
//   }
//
// "profile" ("small" or "large") sets the latent defaults before the
// "latent" object is applied. The canonical form written by to_json spells
// out every key and drops "profile".

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logan/data.hpp"
#include "logan/trainer.hpp"

namespace logan {

struct DataSpec {
  DataKind kind = DataKind::kRing;
  std::size_t modes = 8;
  double radius = 2.0;
  std::size_t side = 5;
  double spacing = 2.0;
  double stddev = 0.02;
  /// Only for kind = table.
  std::vector<std::vector<double>> centers;

  DataDistribution build() const;
};

struct EvalPlan {
  std::vector<double> truncation{1.0, 0.8, 0.6, 0.4, 0.2, 0.1, 0.05, 0.02};
  std::vector<int> steps{0, 1, 5, 10, 20, 30};
};

struct SweepGrid {
  std::vector<double> alpha, beta, w_r, c;
  std::size_t replicates = 1;
};

struct RunConfig {
  std::string run_id = "run";
  /// Empty means $LOGAN_LAB_OUT/<run_id>, or runs/<run_id>.
  std::string output_dir;
  DataSpec data;
  /// train.data and train.seed are filled from `data` and `seed`.
  TrainConfig train;
  EvalPlan eval_plan;
  SweepGrid sweep;

  void validate() const;
};

/// Throws ConfigError naming the offending key.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
/// Canonical JSON text (sorted keys, every field present).
std::string to_json(const RunConfig& config);

}  // namespace logan
