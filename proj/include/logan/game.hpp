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

// Dense reference implementations for differentiable games: simultaneous
// gradient, Hessian, symplectic gradient adjustment, the three-player view
// of latent optimisation and one-step unrolling.
//
// Everything here is exact but O(dim^2) or worse, so games are capped at
// 512 parameters in total.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logan/expr.hpp"
#include "logan/models.hpp"
#include "logan/tensor.hpp"

namespace logan {

inline constexpr std::size_t kMaxGameDim = 512;

struct Player {
  std::string name;
  std::vector<std::string> params;
  Expression loss;
};

struct Game {
  std::vector<Player> players;
  Environment env;
  /// Player whose parameters are a latent step rather than weights; used
  /// by the "logan" dynamics.
  std::optional<std::size_t> latent_player;

  /// Throws unless every loss is scalar, depends on its own parameters and
  /// the game fits the dense cap.
  void validate() const;
  std::vector<std::string> parameter_names() const;
  std::size_t dim() const;
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> theta);
};

/// Analytic example games on scalar players "x" and "y".
/// bilinear: L_x = x*y, L_y = -x*y. potential: L_x = L_y = x^2 + y^2.
Game bilinear_game(double x, double y);
Game potential_game(double x, double y);

/// Player p owns a [1 x dims[p]] vector; with theta the concatenation of
/// all players, L_p = 0.5 theta^T Q_p theta + b_p^T theta.
Game quadratic_game(const std::vector<std::size_t>& dims, const std::vector<Tensor>& q,
                    const std::vector<Tensor>& b, const std::vector<double>& theta0);

/// Latent player "dz" (loss -eta*f), critic "d" (loss f), generator "g"
/// (loss -f) for f = d * g * (z + dz) on scalars.
Game logan_toy_game(double z, double d, double g, double dz, double eta);

/// Each player's own-loss gradient w.r.t. its own parameters, concatenated.
std::vector<double> simultaneous_grad(const Game& game);

/// H[i][j] = d g_i / d theta_j, one nested reverse sweep per row.
Tensor game_hessian(const Game& game);

/// 0.5 (H - H^T).
Tensor antisymmetric_part(const Tensor& h);

/// g + lambda A^T g with A the antisymmetric part of H.
std::vector<double> sga_adjust(std::span<const double> g, const Tensor& h, double lambda);

struct SgaCheckReport {
  /// |logan - sga|_inf / |sga|_inf over the concatenated (theta_D, theta_G).
  double discrepancy = 0.0;
  double abs_discrepancy = 0.0;
  /// |sga - plain|_inf: size of the second-order adjustment.
  double adjustment_norm = 0.0;
  std::vector<double> logan;
  std::vector<double> sga;
  std::vector<double> plain;
};

/// Compares the approximate SGA gradients of the three-player game (cross
/// terms dropped, lambda*gamma = alpha) with the gradients obtained by
/// differentiating through one unclipped GD latent step (c = 1, w_r = 0).
/// `block_d` / `block_g` stop gradients through the latent step as the
/// trainer ablations do.
SgaCheckReport logan_approx_sga_check(const GanModel& model, const Tensor& z, double alpha,
                                      double eta, bool block_d = false, bool block_g = false);

enum class UnrollWhich {
  kUnrollD,  // D takes a step, gradient for theta_G
  kUnrollG,  // G takes a step, gradient for theta_D
};

struct UnrolledResult {
  std::vector<double> exact;
  std::vector<double> taylor;
  double abs_error = 0.0;
  double rel_error = 0.0;
};

/// Gradient of f after one opponent step (D descends f, G ascends it), by
/// differentiating through the actual step, and its first-order form
/// grad(f -/+ alpha |df/dtheta_opp|^2).
UnrolledResult unrolled_gradient(const Expression& f, const std::vector<std::string>& theta_d,
                                 const std::vector<std::string>& theta_g, const Environment& env,
                                 double alpha, UnrollWhich which);
/// Same with f the batch-mean critic value of `model` at latents `z`.
UnrolledResult unrolled_gradient(const GanModel& model, const Tensor& z, double alpha,
                                 UnrollWhich which);

enum class DynamicsMethod { kSimGrad, kSga, kUnrolled, kLogan };

const char* dynamics_name(DynamicsMethod m);
DynamicsMethod parse_dynamics(const std::string& name);

struct DynamicsConfig {
  DynamicsMethod method = DynamicsMethod::kSimGrad;
  double lr = 0.1;
  int steps = 100;
  /// SGA coefficient.
  double lambda = 1.0;
  /// Opponent step size for "unrolled", latent step size for "logan".
  double alpha = 0.1;
};

struct DynamicsPoint {
  int step = 0;
  std::vector<double> theta;
  double theta_norm = 0.0;
  double grad_norm = 0.0;
};

struct Trajectory {
  std::vector<std::string> names;
  std::vector<DynamicsPoint> points;
  bool diverged = false;
};

/// Plain gradient steps with the chosen update direction. For "logan" the
/// latent player is not updated; every other player differentiates through
/// the latent step z - alpha * dL_latent/dz taken from the current state.
/// Stops early when |theta| exceeds 1e6.
Trajectory simulate_dynamics(Game game, const DynamicsConfig& config);

}  // namespace logan
