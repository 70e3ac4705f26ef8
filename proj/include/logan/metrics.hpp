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

// Desk-scale sample-quality metrics and evaluation sweeps.
//
// proxy-FID is the Frechet distance between Gaussians fitted to raw
// samples; it keeps the functional form of FID without a feature network.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "logan/data.hpp"
#include "logan/latent.hpp"
#include "logan/models.hpp"
#include "logan/tensor.hpp"

namespace logan {

inline constexpr double kPsdTolerance = 1e-10;

struct GaussianSummary {
  std::vector<double> mean;
  /// d x d, symmetric.
  Tensor cov;
  std::size_t count = 0;

  std::size_t dim() const { return mean.size(); }
  /// Sample mean and (n-1)-denominator covariance of the rows of `samples`.
  static GaussianSummary fit(const Tensor& samples);
};

/// Squared Frechet distance |mu_p - mu_q|^2 + tr(S_p + S_q - 2 (S_p S_q)^(1/2)).
/// The square-root trace comes from the symmetric product
/// S_p^(1/2) S_q S_p^(1/2). Eigenvalues down to -1e-10 are clamped to 0.
double gaussian_frechet(const GaussianSummary& p, const GaussianSummary& q);

struct Coverage {
  int modes_hit = 0;
  double hq_fraction = 0.0;
};

/// A mode is hit when some sample lies within `radius`; the high-quality
/// fraction is the share of samples within `radius` of any mode.
Coverage mode_coverage(const Tensor& samples, const std::vector<std::vector<double>>& centers,
                       double radius);

struct EvalSettings {
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  double radius = 0.2;
  std::size_t reference_samples = 10000;
  /// Latent refinement used at evaluation; `eval_steps` is the default count.
  LatentOptConfig latent;
};

struct SampleMetrics {
  double proxy_fid = 0.0;
  int modes_hit = 0;
  double hq_fraction = 0.0;
};

/// Gaussian fit of `n` data samples drawn with its own stream from `seed`.
GaussianSummary reference_summary(const DataDistribution& data, std::size_t n, std::uint64_t seed);

SampleMetrics sample_metrics(const Tensor& samples, const DataDistribution& data,
                             const GaussianSummary& reference, double radius);

/// G(z) evaluated numerically.
Tensor generate_samples(const GanModel& model, const Tensor& z);

/// Refines `z` with `steps` latent steps (no parameter updates) and returns z'.
Tensor refine_samples(const GanModel& model, const Tensor& z, const LatentOptConfig& config,
                      int steps);

/// Draws settings.samples latents from settings.seed and evaluates the
/// plain generator.
SampleMetrics evaluate_model(const GanModel& model, const DataDistribution& data,
                             const EvalSettings& settings);

struct TruncationCurvePoint {
  double s = 1.0;
  double proxy_fid = 0.0;
  int modes_hit = 0;
  double hq_fraction = 0.0;
};

/// For each s: z ~ U(-1,1) from settings.seed (same draw for every s),
/// z_bar = s z, settings.latent.eval_steps refinement steps, then metrics.
std::vector<TruncationCurvePoint> truncation_sweep(const GanModel& model,
                                                   const std::vector<double>& s_values,
                                                   const DataDistribution& data,
                                                   const EvalSettings& settings);

struct StepSweepPoint {
  int steps = 0;
  double proxy_fid = 0.0;
  int modes_hit = 0;
  double hq_fraction = 0.0;
  /// Mean of f(z_k) - f(z_0) over samples.
  double mean_critic_gain = 0.0;
  /// Samples with f(z_k) < f(z_0).
  std::size_t ascent_violations = 0;
};

std::vector<StepSweepPoint> eval_latent_steps_sweep(const GanModel& model,
                                                    const std::vector<int>& step_counts,
                                                    const DataDistribution& data,
                                                    const EvalSettings& settings);

/// x_t / sigma_t with sigma_t the (N-1)-denominator standard deviation of
/// x_t..x_{t+N-1}. Length T - N + 1; windows with sigma_t = 0 are nullopt.
std::vector<std::optional<double>> moving_normalise(const std::vector<double>& series,
                                                    std::size_t window);

}  // namespace logan
