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

#include "logan/latent.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <map>

#include "logan/autodiff.hpp"
#include "logan/errors.hpp"

namespace logan {

namespace {

struct RowView {
  std::size_t rows;
  std::size_t cols;
};

RowView rows_of(const Tensor& t) {
  if (t.rank() == 2) return {t.shape()[0], t.shape()[1]};
  if (t.rank() <= 1) return {1, t.numel()};
  throw ShapeError("latent tensors must have rank <= 2, got " + shape_string(t.shape()));
}

void require_finite(const Tensor& g, const char* what) {
  if (!g.all_finite()) throw NonFiniteError(std::string(what) + ": non-finite gradient");
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0)) throw Error("latent step size alpha must be positive");
}

std::string fresh_latent_name() {
  static std::atomic<std::uint64_t> counter{0};
  return "latent.z#" + std::to_string(counter++);
}

}  // namespace

const char* method_name(LatentMethod m) { return m == LatentMethod::kGD ? "gd" : "ngd"; }

LatentMethod parse_method(const std::string& name) {
  if (name == "gd") return LatentMethod::kGD;
  if (name == "ngd") return LatentMethod::kNGD;
  throw ConfigError("unknown latent method '" + name + "' (expected gd or ngd)");
}

void LatentOptConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("latent alpha must be >= 0");
  if (method == LatentMethod::kNGD && !(beta > 0.0)) throw ConfigError("NGD needs beta > 0");
  if (!(w_r >= 0.0)) throw ConfigError("w_r must be non-negative");
  if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("c must lie in [0, 1]");
  if (steps < 0) throw ConfigError("latent steps must be non-negative");
  if (eval_steps < 0) throw ConfigError("eval_steps must be non-negative");
}

LatentOptConfig LatentOptConfig::small_profile() { return {LatentMethod::kNGD, 0.9, 0.1, 0.1, 0.8, 1, 0, true}; }
LatentOptConfig LatentOptConfig::large_profile() { return {LatentMethod::kNGD, 0.9, 5.0, 300.0, 0.5, 1, 0, true}; }

Tensor gd_step(const Tensor& g, double alpha) {
  require_alpha(alpha);
  require_finite(g, "gd_step");
  Tensor out = g;
  for (auto& v : out.mutable_data()) v *= alpha;
  return out;
}

Tensor ngd_step(const Tensor& g, double alpha, double beta) {
  require_alpha(alpha);
  if (!(beta > 0.0)) throw Error("ngd_step: beta must be positive");
  require_finite(g, "ngd_step");
  const auto [rows, cols] = rows_of(g);
  Tensor out = g;
  auto d = out.mutable_data();
  for (std::size_t r = 0; r < rows; ++r) {
    double sq = 0.0;
    for (std::size_t j = 0; j < cols; ++j) sq += d[r * cols + j] * d[r * cols + j];
    const double scale = alpha / (beta + sq);
    for (std::size_t j = 0; j < cols; ++j) d[r * cols + j] *= scale;
  }
  return out;
}

Tensor ngd_step_oracle(const Tensor& g, double alpha, double beta) {
  require_alpha(alpha);
  if (!(beta > 0.0)) throw Error("ngd_step_oracle: beta must be positive");
  require_finite(g, "ngd_step_oracle");
  const auto [rows, cols] = rows_of(g);
  if (cols > 512) throw ShapeError("ngd_step_oracle: dense solve limited to 512 dims");
  std::vector<double> out(g.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    Eigen::Map<const Eigen::VectorXd> gi(g.data().data() + r * cols, static_cast<Eigen::Index>(cols));
    Eigen::MatrixXd fisher = gi * gi.transpose();
    fisher.diagonal().array() += beta;
    Eigen::LLT<Eigen::MatrixXd> llt(fisher);
    if (llt.info() != Eigen::Success) throw Error("ngd_step_oracle: singular system");
    // Refinement with extended-precision residuals keeps the oracle accurate
    // when beta is small next to |g|^2 and the system is ill conditioned.
    const Eigen::VectorXd rhs = alpha * gi;
    Eigen::VectorXd dz = llt.solve(rhs);
    for (int it = 0; it < 3; ++it) {
      Eigen::VectorXd r(static_cast<Eigen::Index>(cols));
      for (Eigen::Index i = 0; i < r.size(); ++i) {
        long double acc = static_cast<long double>(alpha) * gi[i];
        for (Eigen::Index j = 0; j < r.size(); ++j) {
          const long double fij = static_cast<long double>(gi[i]) * gi[j] +
                                  (i == j ? static_cast<long double>(beta) : 0.0L);
          acc -= fij * dz[j];
        }
        r[i] = static_cast<double>(acc);
      }
      dz += llt.solve(r);
    }
    for (std::size_t j = 0; j < cols; ++j) out[r * cols + j] = dz[static_cast<Eigen::Index>(j)];
  }
  return Tensor(g.shape(), std::move(out));
}

std::size_t mask_width(double c, std::size_t dim) {
  if (!(c >= 0.0 && c <= 1.0)) throw Error("mask portion c must lie in [0, 1]");
  // The small slack keeps products like 0.3 * 10 from rounding up a slot.
  const double kept = std::ceil(c * static_cast<double>(dim) - 1e-9);
  return std::min(dim, static_cast<std::size_t>(std::max(0.0, kept)));
}

Tensor apply_mask(const Tensor& dz, double c) {
  const auto [rows, cols] = rows_of(dz);
  const std::size_t keep = mask_width(c, cols);
  Tensor out = dz;
  auto d = out.mutable_data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = keep; j < cols; ++j) d[r * cols + j] = 0.0;
  }
  return out;
}

Expression latent_regulariser(const Expression& dz, double w_r) {
  if (!(w_r >= 0.0)) throw Error("w_r must be non-negative");
  const double rows = dz.shape().size() == 2 ? static_cast<double>(dz.shape()[0]) : 1.0;
  return constant(w_r / rows) * sum(square(dz));
}

double latent_regulariser(const Tensor& dz, double w_r) {
  if (!(w_r >= 0.0)) throw Error("w_r must be non-negative");
  return w_r / static_cast<double>(rows_of(dz).rows) * squared_norm(dz.data());
}

LatentStepResult refine_latent(const CriticFn& f, const Expression& z,
                               const LatentOptConfig& config, int steps) {
  config.validate();
  if (z.shape().size() != 2) throw ShapeError("refine_latent: z must be [N x k]");
  const std::size_t n = z.shape()[0], k = z.shape()[1];

  const std::size_t keep = mask_width(config.c, k);
  std::vector<double> m(n * k, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < keep; ++j) m[r * k + j] = 1.0;
  }
  const Expression mask = constant(Tensor({n, k}, std::move(m)));

  // Differentiate f on a placeholder once, then splice in each step's latent.
  const std::string name = fresh_latent_name();
  const Expression zp = input(name, {n, k});
  const Expression grad_at_placeholder = gradient_expr(sum(f(zp)), name);

  LatentStepResult out;
  out.z_prime = z;
  out.delta_z = constant(Tensor::zeros({n, k}));
  out.g = constant(Tensor::zeros({n, k}));
  Expression total;
  for (int s = 0; s < steps; ++s) {
    const Expression g = substitute(grad_at_placeholder, {{name, out.z_prime}});
    Expression dz;
    if (config.method == LatentMethod::kGD) {
      dz = constant(config.alpha) * g;
      out.curvature.reset();
    } else {
      const Expression denom = row_sum(square(g)) + config.beta;
      dz = g * broadcast_cols(constant(config.alpha) / denom, k);
      out.curvature = 1.0 / denom;
    }
    dz = dz * mask;
    total = s == 0 ? dz : total + dz;
    out.g = g;
    out.z_prime = config.clip ? clip(out.z_prime + dz, -1.0, 1.0) : out.z_prime + dz;
  }
  if (steps > 0) out.delta_z = total;
  return out;
}

LatentStepResult refine_latent(const CriticFn& f, const Expression& z,
                               const LatentOptConfig& config) {
  return refine_latent(f, z, config, config.steps);
}

LatentStepResult refine_latent(const GanModel& model, const Expression& z,
                               const LatentOptConfig& config) {
  return refine_latent([&model](const Expression& zz) { return critic_value(model, zz); }, z,
                       config);
}

}  // namespace logan
