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

// End-to-end LOGAN training: sample, refine latents, differentiate through
// the refinement, update both players and record dynamics diagnostics.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "logan/data.hpp"
#include "logan/latent.hpp"
#include "logan/metrics.hpp"
#include "logan/models.hpp"
#include "logan/rng.hpp"
#include "logan/tensor.hpp"

namespace logan {

enum class OptimiserKind { kSgd, kAdam };

const char* optimiser_name(OptimiserKind k);
OptimiserKind parse_optimiser(const std::string& name);

inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

struct AblationFlags {
  /// Drop the path from theta_D through dz in the discriminator gradient.
  bool block_d_term = false;
  /// Drop the path from theta_G through dz in the generator gradient.
  bool block_g_term = false;
};

struct TrainConfig {
  std::uint64_t seed = 0;
  std::size_t batch = 64;
  std::uint64_t steps = 5000;
  OptimiserKind optimiser = OptimiserKind::kSgd;
  double lr_d = 0.01;
  double lr_g = 0.01;
  LossKind loss = LossKind::kHinge;
  /// false trains a vanilla GAN on the same sampling stream.
  bool latent_enabled = true;
  LatentOptConfig latent = LatentOptConfig::small_profile();
  AblationFlags ablation;
  /// D updated first, G gradient taken at the new theta_D.
  bool alternating = false;
  DataDistribution data = DataDistribution::ring();
  std::size_t latent_dim = 16;
  std::vector<std::size_t> g_hidden{32, 32};
  std::vector<std::size_t> d_hidden{32, 32};
  double slope = 0.2;
  /// Steps between records handed to the sink; 1 records every step.
  std::uint64_t metrics_interval = 1;
  /// Steps between proxy-FID / coverage evaluations; 0 disables them.
  std::uint64_t eval_interval = 0;
  std::uint64_t checkpoint_interval = 0;
  /// Periodic evaluation settings. Training derives eval.seed from `seed`
  /// so the evaluation stream never touches the training stream.
  EvalSettings eval;

  void validate() const;
  MlpSpec generator_spec() const;
  MlpSpec discriminator_spec() const;
};

struct OptimiserState {
  /// Adam second moments; empty for SGD.
  std::vector<Tensor> v_d, v_g;
  std::uint64_t t = 0;
};

struct TrainState {
  GanModel model;
  OptimiserState optimiser;
  Rng rng;
  std::uint64_t step = 0;
};

struct MetricsRecord {
  std::uint64_t step = 0;
  double l_d = 0.0;
  double l_g = 0.0;
  double r_z = 0.0;
  double dz_norm = 0.0;
  double df_abs = 0.0;
  double dtheta_d = 0.0;
  double dtheta_g = 0.0;
  double dtheta_diff = 0.0;
  std::optional<double> curvature_mean;
  std::optional<double> proxy_fid;
  std::optional<int> mode_coverage;
  std::optional<double> hq_fraction;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

/// Fresh model and sampling stream for `config`.
TrainState initial_state(const TrainConfig& config);

struct UpdateNorms {
  double d = 0.0;
  double g = 0.0;
  double diff = 0.0;
};

/// Euclidean norms of the concatenated parameter changes.
UpdateNorms update_norm_diagnostics(const std::vector<Tensor>& d_before,
                                    const std::vector<Tensor>& d_after,
                                    const std::vector<Tensor>& g_before,
                                    const std::vector<Tensor>& g_after);
UpdateNorms update_norm_diagnostics(const GanModel& before, const GanModel& after);

struct DeltaZ {
  /// Mean over rows of |z'_i - z_i|.
  double dz_norm = 0.0;
  /// Mean over rows of |f(z'_i) - f(z_i)|.
  double df_abs = 0.0;
};

DeltaZ delta_z_diagnostics(const GanModel& model, const Tensor& z, const Tensor& z_prime);

/// Parameter gradients of one step, split by path. `direct` holds the
/// gradient with z' held fixed; `via_d` / `via_g` hold the terms that flow
/// through dz into theta_D and theta_G.
struct StepGradients {
  std::vector<Tensor> d_direct, d_via_d;
  std::vector<Tensor> g_direct, g_via_g;
  double l_d = 0.0, l_g = 0.0, r_z = 0.0;
  Tensor z, z_prime;
  std::optional<double> curvature_mean;

  /// Gradients actually applied under `flags`.
  std::vector<Tensor> d_total(const AblationFlags& flags) const;
  std::vector<Tensor> g_total(const AblationFlags& flags) const;
};

/// Owns the training graph for one configuration. The graph is built once
/// and re-evaluated each step with new bindings.
class Trainer {
 public:
  explicit Trainer(const TrainConfig& config);
  /// Uses the architecture of `architecture` instead of the config's
  /// widths; its parameter values are not used.
  Trainer(const TrainConfig& config, const GanModel& architecture);

  const TrainConfig& config() const { return config_; }

  /// Gradients at the current parameters for given latents and data.
  StepGradients gradients(const GanModel& model, const Tensor& z, const Tensor& x) const;

  /// One training step. Throws NonFiniteError on a non-finite loss or gradient.
  MetricsRecord step(TrainState& state) const;

 private:
  struct Graph;
  void build(const GanModel& shape_model);
  TrainConfig config_;
  std::shared_ptr<const Graph> graph_;
  std::optional<GaussianSummary> reference_;
};

MetricsRecord train_step(TrainState& state, const TrainConfig& config);

struct TrainHooks {
  std::function<void(const MetricsRecord&)> on_record;
  std::function<void(const TrainState&)> on_checkpoint;
};

/// Runs `state` forward to config.steps. Calls on_checkpoint at the start
/// of a fresh run, every checkpoint_interval steps and at the end.
void train(const TrainConfig& config, TrainState& state, const TrainHooks& hooks);

}  // namespace logan
