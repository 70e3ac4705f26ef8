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

// Small MLP generator / discriminator pairs and the critic f(z) = D(G(z)).
//
// Parameters live in the model as tensors and enter expressions as named
// identifiers ("G.W0", "G.b0", ..., "D.W0", ...). Every builder also takes
// explicit parameter expressions, so callers can wrap them in
// stop_gradient or substitute updated values.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "logan/expr.hpp"
#include "logan/tensor.hpp"

namespace logan {

enum class Activation { kLeakyRelu, kTanh };

struct MlpSpec {
  /// Input width, hidden widths..., output width.
  std::vector<std::size_t> widths;
  double slope = 0.2;
  bool bias = true;
  /// Bias on the output layer. Generators default to none.
  bool final_bias = true;
  /// Hidden activation. tanh gives MLPs that are smooth in their input,
  /// which some analyses need; leaky-relu is the default.
  Activation activation = Activation::kLeakyRelu;

  std::size_t layers() const { return widths.size() - 1; }
  bool has_bias(std::size_t layer) const {
    return bias && (layer + 1 < layers() || final_bias);
  }
};

/// tanh(x) = 1 - 2 / (exp(2x) + 1), composed from differentiable ops.
Expression tanh(const Expression& x);

/// Throws ConfigError unless the spec has a hidden layer, positive widths
/// and slope in (0, 1).
void validate(const MlpSpec& spec);

enum class LossKind { kWasserstein, kHinge };

class GanModel {
 public:
  GanModel() = default;
  /// Wraps explicit parameters; shapes are checked against the specs.
  /// Unlike init_model this also accepts specs without hidden layers.
  static GanModel from_parameters(MlpSpec generator, MlpSpec discriminator,
                                  std::vector<Tensor> theta_g, std::vector<Tensor> theta_d);

  const MlpSpec& generator_spec() const { return gen_; }
  const MlpSpec& discriminator_spec() const { return disc_; }
  std::size_t latent_dim() const { return gen_.widths.front(); }
  std::size_t data_dim() const { return gen_.widths.back(); }

  const std::vector<Tensor>& theta_g() const { return theta_g_; }
  const std::vector<Tensor>& theta_d() const { return theta_d_; }
  std::vector<Tensor>& theta_g() { return theta_g_; }
  std::vector<Tensor>& theta_d() { return theta_d_; }

  const std::vector<std::string>& g_names() const { return g_names_; }
  const std::vector<std::string>& d_names() const { return d_names_; }

  /// Parameter identifiers in layer order.
  std::vector<Expression> g_params() const;
  std::vector<Expression> d_params() const;

  /// Binds every parameter into `env`.
  void bind(Environment& env) const;
  Environment environment() const;

  std::size_t parameter_count() const;

 private:
  MlpSpec gen_, disc_;
  std::vector<Tensor> theta_g_, theta_d_;
  std::vector<std::string> g_names_, d_names_;
};

/// Parameter names and shapes for `spec` under `prefix`.
std::vector<std::pair<std::string, Shape>> parameter_layout(const MlpSpec& spec,
                                                            const std::string& prefix);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
GanModel init_model(const MlpSpec& generator, const MlpSpec& discriminator,
                    std::size_t latent_dim, std::size_t data_dim, std::uint64_t seed);

/// Applies an MLP to the rows of `x` ([N x in] -> [N x out]).
Expression mlp_apply(const MlpSpec& spec, const std::vector<Expression>& params,
                     const Expression& x);

Expression generate(const GanModel& model, const Expression& z);
Expression generate(const GanModel& model, const Expression& z,
                    const std::vector<Expression>& theta_g);
Expression discriminate(const GanModel& model, const Expression& x);
Expression discriminate(const GanModel& model, const Expression& x,
                        const std::vector<Expression>& theta_d);

/// f(z) = D(G(z)), one row per latent.
Expression critic_value(const GanModel& model, const Expression& z);
Expression critic_value(const GanModel& model, const Expression& z,
                        const std::vector<Expression>& theta_d,
                        const std::vector<Expression>& theta_g);

struct Losses {
  Expression d;
  Expression g;
};

/// Batch losses from critic outputs on real and fake rows (means over rows).
/// Wasserstein: L_D = d_fake - d_real, L_G = -d_fake.
/// Hinge: L_D = relu(1 - d_real) + relu(1 + d_fake), L_G = -d_fake.
Losses losses(LossKind kind, const Expression& d_real, const Expression& d_fake);
std::pair<double, double> losses(LossKind kind, double d_real, double d_fake);

const char* loss_name(LossKind kind);
LossKind parse_loss(const std::string& name);

/// Latent source U(-1, 1)^dim, one row per sample.
class Rng;
Tensor sample_latents(Rng& rng, std::size_t n, std::size_t dim);

}  // namespace logan
