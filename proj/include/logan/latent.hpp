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

// Latent refinement: z' = clip(z + mask * dz, -1, 1) with a gradient
// ascent (GD) or damped empirical-Fisher natural gradient (NGD) step.
//
// Rows of a latent batch are independent samples. The NGD denominator uses
// each row's own gradient only.

#pragma once

#include <functional>
#include <optional>
#include <string>

#include "logan/expr.hpp"
#include "logan/models.hpp"
#include "logan/tensor.hpp"

namespace logan {

enum class LatentMethod { kGD, kNGD };

const char* method_name(LatentMethod m);
LatentMethod parse_method(const std::string& name);

struct LatentOptConfig {
  LatentMethod method = LatentMethod::kNGD;
  double alpha = 0.9;
  double beta = 0.1;
  double w_r = 0.1;
  double c = 0.8;
  int steps = 1;
  int eval_steps = 0;
  /// Clip z' to [-1, 1]. Only analyses that need the unclipped map turn it off.
  bool clip = true;

  /// Throws ConfigError on an invalid combination.
  void validate() const;

  static LatentOptConfig small_profile();
  static LatentOptConfig large_profile();
};

struct LatentStepResult {
  Expression z_prime;
  /// Applied (masked, pre-clip) update, summed over steps.
  Expression delta_z;
  /// df/dz at the latent of the last step.
  Expression g;
  /// 1 / (beta + |g|^2) per row for NGD.
  std::optional<Expression> curvature;
};

/// Per-row critic over a latent batch, [N x k] -> [N x 1].
using CriticFn = std::function<Expression(const Expression& z)>;

Tensor gd_step(const Tensor& g, double alpha);
/// alpha / (beta + |g_i|^2) * g_i for each row g_i (a rank-0/1 tensor is one row).
Tensor ngd_step(const Tensor& g, double alpha, double beta);
/// Solves (g_i g_i^T + beta I) dz_i = alpha g_i densely. Row length <= 512.
Tensor ngd_step_oracle(const Tensor& g, double alpha, double beta);

/// Number of leading coordinates kept for portion `c`: ceil(c * dim).
std::size_t mask_width(double c, std::size_t dim);
/// Zeroes all but the leading mask_width(c, dim) entries of each row.
Tensor apply_mask(const Tensor& dz, double c);

/// w_r * mean over rows of |dz_i|^2.
Expression latent_regulariser(const Expression& dz, double w_r);
double latent_regulariser(const Tensor& dz, double w_r);

/// Records `steps` refinement iterations as one differentiable graph, so
/// parameter gradients flow through dz.
LatentStepResult refine_latent(const CriticFn& f, const Expression& z,
                               const LatentOptConfig& config, int steps);
LatentStepResult refine_latent(const CriticFn& f, const Expression& z,
                               const LatentOptConfig& config);
LatentStepResult refine_latent(const GanModel& model, const Expression& z,
                               const LatentOptConfig& config);

}  // namespace logan
