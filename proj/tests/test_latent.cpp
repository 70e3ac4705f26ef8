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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "logan/autodiff.hpp"
#include "logan/errors.hpp"
#include "logan/latent.hpp"
#include "logan/rng.hpp"
#include "test_support.hpp"

namespace logan {
namespace {

using testing::random_tensor;
using testing::tiny_model;
using testing::toy_model;

TEST(GdStep, Examples) {
  auto dz = gd_step(Tensor::row({3, 4}), 0.0001);
  EXPECT_DOUBLE_EQ(dz[0], 0.0003);
  EXPECT_DOUBLE_EQ(dz[1], 0.0004);
  EXPECT_EQ(max_abs(gd_step(Tensor::row({0, 0}), 0.5).data()), 0.0);
  EXPECT_EQ(gd_step(Tensor::row({1, 0, 0}), 1.0), Tensor::row({1, 0, 0}));
  EXPECT_THROW(gd_step(Tensor::row({1}), 0.0), Error);
}

// 2x2 inverse by the adjugate formula; independent of Eigen and of the
// closed form.
std::array<double, 2> solve_2x2(std::array<double, 2> g, double alpha, double beta) {
  const double a = g[0] * g[0] + beta, b = g[0] * g[1], d = g[1] * g[1] + beta;
  const double det = a * d - b * b;
  return {alpha * (d * g[0] - b * g[1]) / det, alpha * (a * g[1] - b * g[0]) / det};
}

TEST(NgdStep, ExampleAgainstExplicitInverse) {
  auto dz = ngd_step(Tensor::row({3, 4}), 0.9, 0.1);
  auto want = solve_2x2({3, 4}, 0.9, 0.1);
  EXPECT_NEAR(dz[0], want[0], 1e-12);
  EXPECT_NEAR(dz[1], want[1], 1e-12);
  EXPECT_NEAR(dz[0], 0.107569, 1e-6);
  EXPECT_NEAR(dz[1], 0.143426, 1e-6);
}

TEST(NgdStep, ZeroAndLargeGradients) {
  EXPECT_EQ(max_abs(ngd_step(Tensor::row({0, 0}), 0.9, 0.1).data()), 0.0);
  auto big = ngd_step(Tensor::row({1e6, 0}), 0.9, 0.1);
  EXPECT_NEAR(l2_norm(big.data()), 9e-7, 1e-12);
  EXPECT_THROW(ngd_step(Tensor::row({1}), 0.9, 0.0), Error);
}

TEST(NgdStepOracle, Examples) {
  auto dz = ngd_step_oracle(Tensor::row({1, 0, 0}), 1.0, 1.0);
  EXPECT_NEAR(dz[0], 0.5, 1e-15);
  EXPECT_EQ(dz[1], 0.0);
  EXPECT_EQ(max_abs(ngd_step_oracle(Tensor::row({0, 0}), 1.0, 1.0).data()), 0.0);
  EXPECT_THROW(ngd_step_oracle(Tensor::zeros({1, 513}), 1.0, 1.0), ShapeError);
}

TEST(NgdStep, ShermanMorrisonAgainstDenseSolve) {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = std::vector<std::size_t>{2, 16, 128, 512}[trial % 4];
    const double scale = std::pow(10.0, rng.uniform(-3, 2));
    std::vector<double> g(dim);
    for (auto& v : g) v = scale * rng.normal();
    const double alpha = rng.uniform(0.01, 2.0), beta = std::pow(10.0, rng.uniform(-2, 1));
    const Tensor gt({1, dim}, g);
    EXPECT_LT(relative_error(ngd_step(gt, alpha, beta).data(),
                             ngd_step_oracle(gt, alpha, beta).data()),
              1e-10);
  }
}

TEST(NgdStep, ColinearNormBoundedAndCurvatureInRange) {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> g(8);
    const double scale = std::pow(10.0, rng.uniform(-4, 4));
    for (auto& v : g) v = scale * rng.normal();
    const double alpha = rng.uniform(0.01, 2.0), beta = rng.uniform(0.01, 10.0);
    const Tensor gt({1, 8}, g);
    const auto dz = ngd_step(gt, alpha, beta);
    double dot = 0;
    for (std::size_t i = 0; i < 8; ++i) dot += dz[i] * g[i];
    EXPECT_NEAR(dot / (l2_norm(dz.data()) * l2_norm(g)), 1.0, 1e-12);
    EXPECT_LE(l2_norm(dz.data()), alpha / (2 * std::sqrt(beta)) * (1 + 1e-12));
    const double curvature = 1.0 / (beta + squared_norm(g));
    EXPECT_GT(curvature, 0.0);
    EXPECT_LE(curvature, 1.0 / beta);
  }
}

TEST(NgdStep, RowsAreIndependentSamples) {
  auto both = ngd_step(Tensor::matrix(2, 2, {3, 4, 1, 0}), 0.9, 0.1);
  auto first = ngd_step(Tensor::row({3, 4}), 0.9, 0.1);
  auto second = ngd_step(Tensor::row({1, 0}), 0.9, 0.1);
  EXPECT_EQ(both[0], first[0]);
  EXPECT_EQ(both[1], first[1]);
  EXPECT_EQ(both[2], second[0]);
}

TEST(ApplyMask, Examples) {
  const Tensor ones = Tensor::row({1, 1, 1, 1});
  EXPECT_EQ(apply_mask(ones, 1.0), ones);
  EXPECT_EQ(max_abs(apply_mask(ones, 0.0).data()), 0.0);
  EXPECT_EQ(apply_mask(ones, 0.5), Tensor::row({1, 1, 0, 0}));
  EXPECT_EQ(mask_width(0.8, 16), 13u);
  EXPECT_EQ(mask_width(0.3, 10), 3u);
  EXPECT_EQ(mask_width(0.01, 10), 1u);
}

TEST(LatentRegulariser, Examples) {
  EXPECT_EQ(latent_regulariser(Tensor::row({0, 0}), 0.1), 0.0);
  EXPECT_NEAR(latent_regulariser(Tensor::row({1, 1}), 0.1), 0.2, 1e-15);
  EXPECT_NEAR(latent_regulariser(Tensor::row({0.1, 0}), 300.0), 3.0, 1e-12);
  const Environment env{{"dz", Tensor::row({1, 1})}};
  EXPECT_NEAR(evaluate(latent_regulariser(input("dz", {1, 2}), 0.1), env).item(), 0.2, 1e-15);
}

TEST(LatentOptConfig, ValidatesAndProfiles) {
  auto s = LatentOptConfig::small_profile();
  EXPECT_EQ(s.alpha, 0.9);
  EXPECT_EQ(s.beta, 0.1);
  EXPECT_EQ(s.w_r, 0.1);
  EXPECT_EQ(s.c, 0.8);
  auto l = LatentOptConfig::large_profile();
  EXPECT_EQ(l.beta, 5.0);
  EXPECT_EQ(l.w_r, 300.0);
  EXPECT_EQ(l.c, 0.5);
  s.c = 1.5;
  EXPECT_THROW(s.validate(), ConfigError);
  s = LatentOptConfig::small_profile();
  s.beta = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s.method = LatentMethod::kGD;
  EXPECT_NO_THROW(s.validate());
}

TEST(RefineLatent, ZeroStepSizeIsIdentity) {
  auto m = tiny_model(1);
  LatentOptConfig cfg = LatentOptConfig::small_profile();
  cfg.alpha = 0.0;
  Rng rng(1);
  auto env = m.environment();
  env.bind("z", sample_latents(rng, 6, 2));
  auto r = refine_latent(m, input("z", {6, 2}), cfg);
  EXPECT_EQ(evaluate(r.z_prime, env), env.at("z"));
  EXPECT_EQ(max_abs(evaluate(r.delta_z, env).data()), 0.0);
}

TEST(RefineLatent, ToyNgdStep) {
  auto m = toy_model(1.0, 1.0);
  LatentOptConfig cfg{LatentMethod::kNGD, 0.9, 0.1, 0.0, 1.0, 1, 0};
  auto env = m.environment();
  env.bind("z", Tensor::matrix(1, 1, {0.0}));
  auto r = refine_latent(m, input("z", {1, 1}), cfg);
  EXPECT_EQ(evaluate(r.g, env).item(), 1.0);
  EXPECT_NEAR(evaluate(r.delta_z, env).item(), 0.9 / 1.1, 1e-15);
  EXPECT_NEAR(evaluate(r.z_prime, env).item(), 0.81818181818, 1e-10);
  EXPECT_NEAR(evaluate(*r.curvature, env).item(), 1.0 / 1.1, 1e-15);
}

TEST(RefineLatent, AscendsCriticForSmallSteps) {
  for (LatentMethod method : {LatentMethod::kGD, LatentMethod::kNGD}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      auto m = tiny_model(seed, 3, 4);
      Rng rng(seed);
      auto env = m.environment();
      env.bind("z", sample_latents(rng, 1, 3));
      const auto z = input("z", {1, 3});
      LatentOptConfig cfg{method, 1e-3, 0.1, 0.0, 1.0, 1, 0};
      auto r = refine_latent(m, z, cfg);
      const double before = evaluate(critic_value(m, z), env).item();
      const double after = evaluate(critic_value(m, r.z_prime), env).item();
      EXPECT_GE(after, before) << "seed " << seed;
    }
  }
}

TEST(RefineLatent, MatchesNumericPipelineAndMaskInvariants) {
  auto m = tiny_model(5, 5, 4);
  Rng rng(9);
  const Tensor z0 = sample_latents(rng, 4, 5);
  auto env = m.environment();
  env.bind("z", z0);
  LatentOptConfig cfg{LatentMethod::kNGD, 3.0, 0.05, 0.0, 0.6, 2, 0};
  auto r = refine_latent(m, input("z", {4, 5}), cfg);
  const Tensor got = evaluate(r.z_prime, env);

  // Step-by-step numeric oracle.
  Tensor z = z0;
  for (int s = 0; s < 2; ++s) {
    Environment e = m.environment();
    e.bind("q", z);
    const auto g = gradient(sum(critic_value(m, input("q", {4, 5}))), {"q"}, e)[0];
    const auto dz = apply_mask(ngd_step(g, cfg.alpha, cfg.beta), cfg.c);
    for (std::size_t i = 0; i < z.numel(); ++i) z[i] = std::clamp(z[i] + dz[i], -1.0, 1.0);
  }
  EXPECT_LT(relative_error(got.data(), z.data()), 1e-14);

  for (std::size_t r0 = 0; r0 < 4; ++r0) {
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_LE(std::abs(got.at(r0, j)), 1.0);
      if (j >= mask_width(cfg.c, 5)) EXPECT_EQ(got.at(r0, j), z0.at(r0, j));
    }
  }
}

TEST(RefineLatent, ClipIsIdempotent) {
  const Environment env{{"z", Tensor::row({-3, -0.5, 0.2, 9})}};
  const auto once = clip(input("z", {1, 4}), -1, 1);
  EXPECT_EQ(evaluate(once, env), evaluate(clip(once, -1, 1), env));
}

}  // namespace
}  // namespace logan
