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

// Oracle and property checks behind `logan_lab check`. Each one is small
// enough for the whole suite to finish in seconds.

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "commands.hpp"
#include "logan/autodiff.hpp"
#include "logan/checkpoint.hpp"
#include "logan/errors.hpp"
#include "logan/game.hpp"
#include "logan/latent.hpp"
#include "logan/metrics.hpp"
#include "logan/trainer.hpp"

namespace logan::cli {

namespace {

Tensor random_tensor(std::mt19937_64& rng, const Shape& shape, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> d(shape_numel(shape));
  for (auto& v : d) v = u(rng);
  return Tensor(shape, std::move(d));
}

std::vector<double> flat(const std::vector<Tensor>& ts) {
  std::vector<double> out;
  for (const auto& t : ts) out.insert(out.end(), t.values().begin(), t.values().end());
  return out;
}

GanModel tiny(std::uint64_t seed) {
  MlpSpec g{{2, 3, 2}, 0.2, true, false};
  MlpSpec d{{2, 3, 1}, 0.2, true, true};
  GanModel m = init_model(g, d, 2, 2, seed);
  std::mt19937_64 rng(seed + 1000);
  for (std::size_t i = 0; i < m.theta_d().size(); ++i) {
    if (m.d_names()[i].find(".b") != std::string::npos) m.theta_d()[i] = random_tensor(rng, m.theta_d()[i].shape(), -0.3, 0.3);
  }
  for (std::size_t i = 0; i < m.theta_g().size(); ++i) {
    if (m.g_names()[i].find(".b") != std::string::npos) m.theta_g()[i] = random_tensor(rng, m.theta_g()[i].shape(), -0.3, 0.3);
  }
  return m;
}

GanModel scalar_toy(double a, double b) {
  MlpSpec s{{1, 1}, 0.2, false, false};
  return GanModel::from_parameters(s, s, {Tensor::matrix(1, 1, {b})}, {Tensor::matrix(1, 1, {a})});
}

TrainConfig tiny_config(std::uint64_t seed) {
  TrainConfig c;
  c.seed = seed;
  c.batch = 4;
  c.latent_dim = 2;
  c.g_hidden = {3};
  c.d_hidden = {3};
  return c;
}

CheckResult make(std::string name, double err, double tol, std::string detail = "") {
  return {std::move(name), err, tol, err <= tol, std::move(detail)};
}

CheckResult gradient_vs_fd() {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Expression x = parameter("x", {2, 3});
    const Expression w = input("w", {3, 2});
    const Expression e = sum(square(sin(matmul(x, w)))) + sum(exp(leaky_relu(x, 0.2) * 0.3) * cos(x));
    Environment env{{"x", random_tensor(rng, {2, 3})}, {"w", random_tensor(rng, {3, 2})}};
    const Tensor g = gradient(e, {"x"}, env)[0];
    const Tensor fd = finite_difference(
        [&](const Tensor& t) {
          Environment l = env;
          l.bind("x", t);
          return evaluate(e, l).item();
        },
        env.at("x"), 1e-6);
    worst = std::max(worst, relative_error(g.data(), fd.data()));
  }
  return make("autodiff.gradient_vs_fd", worst, 1e-6, "20 random composite graphs");
}

CheckResult nested_vs_fd() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Expression x = parameter("x", {1, 3});
    const Expression f = sum(sin(x) * square(x)) + sum(exp(x * 0.5));
    const Expression gsq = sum(square(gradient_expr(f, "x")));
    Environment env{{"x", random_tensor(rng, {1, 3})}};
    const Tensor g = gradient(gsq, {"x"}, env)[0];
    const Tensor fd = finite_difference(
        [&](const Tensor& t) {
          Environment l = env;
          l.bind("x", t);
          return evaluate(gsq, l).item();
        },
        env.at("x"), 1e-5);
    worst = std::max(worst, relative_error(g.data(), fd.data()));
  }
  return make("autodiff.nested_vs_fd", worst, 1e-4, "gradient of |grad f|^2");
}

CheckResult sherman_morrison() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ua(0.01, 2.0), ub(0.01, 10.0);
  double worst = 0.0;
  int n = 0;
  for (std::size_t dim : {2u, 16u, 128u, 512u}) {
    for (int trial = 0; trial < 25; ++trial, ++n) {
      const Tensor g = random_tensor(rng, {1, dim});
      const double a = ua(rng), b = ub(rng);
      worst = std::max(worst, relative_error(ngd_step(g, a, b).data(), ngd_step_oracle(g, a, b).data()));
    }
  }
  return make("latent.sherman_morrison", worst, 1e-10, std::to_string(n) + " dense solves");
}

CheckResult mask_examples() {
  const double err = std::abs(static_cast<double>(mask_width(0.8, 16)) - 13.0) +
                     std::abs(static_cast<double>(mask_width(0.3, 10)) - 3.0) +
                     std::abs(static_cast<double>(mask_width(1.0, 7)) - 7.0);
  return make("latent.mask_width", err, 0.0, "c*dim rounded up");
}

CheckResult gd_ascent() {
  std::size_t violations = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const GanModel m = tiny(s);
    std::mt19937_64 rng(s);
    const Tensor z = random_tensor(rng, {8, 2}, -0.9, 0.9);
    LatentOptConfig c;
    c.method = LatentMethod::kGD;
    c.alpha = 1e-3;
    Environment env = m.environment();
    env.bind("z", z);
    const Expression zin = input("z", z.shape());
    const Tensor f0 = evaluate(critic_value(m, zin), env);
    const Tensor f1 = evaluate(critic_value(m, refine_latent(m, zin, c).z_prime), env);
    for (std::size_t i = 0; i < f0.numel(); ++i) violations += f1[i] < f0[i] ? 1 : 0;
  }
  return make("latent.small_step_ascent", static_cast<double>(violations), 0.0, "violations over 160 latents");
}

CheckResult eq6_toy() {
  const double a = 0.7, b = -1.3, z = 0.4, x = 0.25, alpha = 0.3;
  TrainConfig c;
  c.batch = 1;
  c.loss = LossKind::kWasserstein;
  c.data = DataDistribution::table({{0.0}}, 0.1);
  c.latent.method = LatentMethod::kGD;
  c.latent.alpha = alpha;
  c.latent.w_r = 0.0;
  c.latent.c = 1.0;
  c.latent.clip = false;
  const GanModel toy = scalar_toy(a, b);
  const auto sg = Trainer(c, toy).gradients(toy, Tensor::matrix(1, 1, {z}), Tensor::matrix(1, 1, {x}));
  const double want_d = b * z + 2 * alpha * a * b * b - x;
  const double want_g = -(a * z + 2 * alpha * a * a * b);
  const double err = std::max(std::abs(sg.d_total({})[0].item() - want_d), std::abs(sg.g_total({})[0].item() - want_g));
  return make("trainer.scalar_toy_hand_expansion", err, 1e-10, "f = theta_D theta_G z");
}

CheckResult nested_fd_training() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto c = tiny_config(s);
    c.latent.method = s % 2 ? LatentMethod::kGD : LatentMethod::kNGD;
    c.latent.alpha = 0.5;
    GanModel m = tiny(s + 200);
    const Trainer tr(c, m);
    std::mt19937_64 rng(s);
    const Tensor z = random_tensor(rng, {4, 2}, -0.5, 0.5), x = random_tensor(rng, {4, 2}, -2.0, 2.0);
    const auto sg = tr.gradients(m, z, x);
    std::vector<double> fd;
    for (int player = 0; player < 2; ++player) {
      auto& theta = player == 0 ? m.theta_d() : m.theta_g();
      for (std::size_t p = 0; p < theta.size(); ++p) {
        const Tensor saved = theta[p];
        const Tensor g = finite_difference(
            [&](const Tensor& t) {
              theta[p] = t;
              const auto r = tr.gradients(m, z, x);
              return player == 0 ? r.l_d : r.l_g;
            },
            saved, 1e-6);
        theta[p] = saved;
        fd.insert(fd.end(), g.values().begin(), g.values().end());
      }
    }
    auto an = flat(sg.d_total({}));
    const auto gg = flat(sg.g_total({}));
    an.insert(an.end(), gg.begin(), gg.end());
    worst = std::max(worst, relative_error(an, fd));
  }
  return make("trainer.nested_fd", worst, 1e-4, "10 tiny models, GD and NGD");
}

CheckResult ablation_algebra() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const GanModel m = tiny(s + 100);
    std::mt19937_64 rng(s);
    const Tensor z = random_tensor(rng, {4, 2}), x = random_tensor(rng, {4, 2}, -2.0, 2.0);
    auto grads = [&](bool bd, bool bg) {
      auto c = tiny_config(s);
      c.ablation = {bd, bg};
      const auto sg = Trainer(c, m).gradients(m, z, x);
      auto v = flat(sg.d_total(c.ablation));
      const auto g = flat(sg.g_total(c.ablation));
      v.insert(v.end(), g.begin(), g.end());
      return v;
    };
    const auto full = grads(false, false), both = grads(true, true), kd = grads(false, true), kg = grads(true, false);
    double scale = 0.0;
    for (double v : full) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < full.size(); ++i) {
      worst = std::max(worst, std::abs(full[i] - (both[i] + (kd[i] - both[i]) + (kg[i] - both[i]))) / scale);
    }
  }
  return make("trainer.ablation_decomposition", worst, 4 * std::numeric_limits<double>::epsilon(), "relative to max |grad|");
}

CheckResult vanilla_equivalence() {
  auto logan = tiny_config(7);
  logan.latent.alpha = 0.0;
  logan.ablation = {true, true};
  auto vanilla = tiny_config(7);
  vanilla.latent_enabled = false;
  TrainState a = initial_state(logan), b = initial_state(vanilla);
  const Trainer ta(logan), tb(vanilla);
  for (int s = 0; s < 5; ++s) {
    ta.step(a);
    tb.step(b);
  }
  const double diff = relative_error(flat(a.model.theta_d()), flat(b.model.theta_d())) +
                      relative_error(flat(a.model.theta_g()), flat(b.model.theta_g()));
  const bool exact = a.model.theta_d() == b.model.theta_d() && a.model.theta_g() == b.model.theta_g();
  return make("trainer.zero_step_is_vanilla", exact ? 0.0 : std::max(diff, 1e-300), 0.0, "5 steps, bitwise");
}

CheckResult hessian_vs_fd() {
  std::mt19937_64 rng(4);
  const std::vector<std::size_t> dims{2, 1};
  std::vector<Tensor> q, b;
  for (int p = 0; p < 2; ++p) {
    q.push_back(random_tensor(rng, {3, 3}));
    b.push_back(random_tensor(rng, {1, 3}));
  }
  Game game = quadratic_game(dims, q, b, random_tensor(rng, {1, 3}).values());
  const Tensor h = game_hessian(game);
  const auto theta = game.flat_parameters();
  double worst = 0.0;
  const double eps = 1e-6;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    auto up = theta, dn = theta;
    up[j] += eps;
    dn[j] -= eps;
    game.set_flat_parameters(up);
    const auto gu = simultaneous_grad(game);
    game.set_flat_parameters(dn);
    const auto gd = simultaneous_grad(game);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      worst = std::max(worst, std::abs(h.at(i, j) - (gu[i] - gd[i]) / (2 * eps)));
    }
  }
  return make("game.hessian_vs_fd", worst, 1e-6, "random 3-dim quadratic game");
}

CheckResult bilinear_dynamics() {
  double worst = 0.0;
  for (auto method : {DynamicsMethod::kSimGrad, DynamicsMethod::kSga}) {
    DynamicsConfig dc;
    dc.method = method;
    const Trajectory t = simulate_dynamics(bilinear_game(1.0, 1.0), dc);
    double x = 1.0, y = 1.0;
    for (std::size_t k = 1; k < t.points.size(); ++k) {
      // Direct iteration: L_x = xy, L_y = -xy, A = [[0,1],[-1,0]].
      const double gx = y, gy = -x;
      const double ax = method == DynamicsMethod::kSga ? gx - gy : gx;
      const double ay = method == DynamicsMethod::kSga ? gy + gx : gy;
      x -= 0.1 * ax;
      y -= 0.1 * ay;
      worst = std::max({worst, std::abs(t.points[k].theta[0] - x), std::abs(t.points[k].theta[1] - y)});
      const bool monotone = method == DynamicsMethod::kSimGrad ? t.points[k].theta_norm > t.points[k - 1].theta_norm
                                                                : t.points[k].theta_norm < t.points[k - 1].theta_norm;
      if (!monotone) worst = std::max(worst, 1.0);
    }
  }
  return make("game.bilinear_direct_iteration", worst, 0.0, "simgrad out, SGA in");
}

CheckResult approx_sga() {
  double worst = 0.0;
  for (double alpha : {1e-1, 1.0, 10.0}) {
    const auto r = logan_approx_sga_check(scalar_toy(0.8, -1.1), Tensor::matrix(1, 1, {0.3}), alpha, 0.5);
    worst = std::max(worst, r.discrepancy);
  }
  return make("game.logan_matches_sga_multilinear", worst, 1e-8, "scalar toy, alpha up to 10");
}

CheckResult unrolled_taylor() {
  // Hand case: f = theta_D theta_G at (1, 2), alpha = 0.1 -> 0.6 exactly.
  const Expression f = parameter("d", {1, 1}) * parameter("g", {1, 1});
  Environment env{{"d", Tensor::matrix(1, 1, {1.0})}, {"g", Tensor::matrix(1, 1, {2.0})}};
  const auto hand = unrolled_gradient(f, {"d"}, {"g"}, env, 0.1, UnrollWhich::kUnrollD);
  double err = std::abs(hand.exact[0] - 0.6);

  std::mt19937_64 rng(5);
  const Expression d = parameter("d", {1, 2}), g = parameter("g", {1, 2});
  const Tensor m1 = random_tensor(rng, {2, 2}), m2 = random_tensor(rng, {2, 2});
  const Expression q = sum(matmul(d, constant(m1)) * g) + sum(square(matmul(g, constant(m2)))) * 0.5 +
                       sum(square(d) * g) * 0.3;
  Environment e2{{"d", random_tensor(rng, {1, 2})}, {"g", random_tensor(rng, {1, 2})}};
  std::vector<double> la, le;
  for (double a : {1e-2, 1e-3, 1e-4}) {
    la.push_back(std::log(a));
    le.push_back(std::log(unrolled_gradient(q, {"d"}, {"g"}, e2, a, UnrollWhich::kUnrollD).abs_error));
  }
  const double slope = (le.back() - le.front()) / (la.back() - la.front());
  if (slope < 1.9) err = std::max(err, 1.9 - slope);
  return make("game.unrolled_taylor_order", err, 1e-12, "slope " + std::to_string(slope));
}

CheckResult frechet_examples() {
  auto summary = [](std::vector<double> mean, std::vector<double> cov) {
    GaussianSummary s;
    s.mean = std::move(mean);
    s.cov = Tensor({2, 2}, std::move(cov));
    s.count = 10;
    return s;
  };
  const double e1 = std::abs(gaussian_frechet(summary({0, 0}, {1, 0, 0, 1}), summary({1, 0}, {1, 0, 0, 1})) - 1.0);
  const double e2 = std::abs(gaussian_frechet(summary({0, 0}, {4, 0, 0, 4}), summary({0, 0}, {1, 0, 0, 1})) - 2.0);
  const auto p = summary({0.2, 0.1}, {2, 0.3, 0.3, 1});
  const double e3 = std::abs(gaussian_frechet(p, p));
  return make("metrics.frechet_examples", std::max({e1, e2, e3}), 1e-12);
}

CheckResult moving_normalise_check() {
  std::vector<double> x;
  for (int i = 0; i < 30; ++i) x.push_back(i % 2 ? -1.0 : 1.0);
  double err = 0.0;
  const auto out = moving_normalise(x, 2);
  for (std::size_t t = 0; t < out.size(); ++t) err = std::max(err, std::abs(*out[t] - x[t] / std::sqrt(2.0)));
  std::mt19937_64 rng(6);
  const auto y = random_tensor(rng, {1, 100}).values();
  auto y4 = y;
  for (auto& v : y4) v *= 4.0;
  if (moving_normalise(y, 20) != moving_normalise(y4, 20)) err = std::max(err, 1.0);
  return make("metrics.moving_normalise", err, 1e-12, "alternating series and x4 rescaling");
}

CheckResult checkpoint_roundtrip() {
  auto c = tiny_config(11);
  c.optimiser = OptimiserKind::kAdam;
  TrainState s = initial_state(c);
  const Trainer tr(c);
  for (int i = 0; i < 3; ++i) tr.step(s);
  const std::string bytes = encode_checkpoint(s);
  TrainState back = decode_checkpoint(bytes);
  bool ok = encode_checkpoint(back) == bytes;
  TrainState cont = s;
  for (int i = 0; i < 3; ++i) ok = ok && tr.step(back) == tr.step(cont);
  return make("persist.checkpoint_resume", ok ? 0.0 : 1.0, 0.0, "encode/decode and 3 resumed steps");
}

}  // namespace

std::vector<CheckResult> run_checks() {
  const std::vector<std::pair<const char*, std::function<CheckResult()>>> checks{
      {"autodiff.gradient_vs_fd", gradient_vs_fd},
      {"autodiff.nested_vs_fd", nested_vs_fd},
      {"latent.sherman_morrison", sherman_morrison},
      {"latent.mask_width", mask_examples},
      {"latent.small_step_ascent", gd_ascent},
      {"trainer.scalar_toy_hand_expansion", eq6_toy},
      {"trainer.nested_fd", nested_fd_training},
      {"trainer.ablation_decomposition", ablation_algebra},
      {"trainer.zero_step_is_vanilla", vanilla_equivalence},
      {"game.hessian_vs_fd", hessian_vs_fd},
      {"game.bilinear_direct_iteration", bilinear_dynamics},
      {"game.logan_matches_sga_multilinear", approx_sga},
      {"game.unrolled_taylor_order", unrolled_taylor},
      {"metrics.frechet_examples", frechet_examples},
      {"metrics.moving_normalise", moving_normalise_check},
      {"persist.checkpoint_resume", checkpoint_roundtrip},
  };
  std::vector<CheckResult> out;
  for (const auto& [name, check] : checks) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({name, 0.0, 0.0, false, std::string("threw: ") + e.what()});
    }
  }
  return out;
}

}  // namespace logan::cli
