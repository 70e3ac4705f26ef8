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

#include "logan/models.hpp"

#include <cmath>

#include "logan/errors.hpp"
#include "logan/rng.hpp"

namespace logan {

namespace {

void check_widths(const MlpSpec& spec) {
  if (spec.widths.size() < 2) throw ConfigError("MLP needs input and output widths");
  for (auto w : spec.widths) {
    if (w == 0) throw ConfigError("MLP widths must be positive");
  }
  if (!(spec.slope > 0.0 && spec.slope < 1.0)) {
    throw ConfigError("leaky-relu slope must lie in (0, 1)");
  }
}

std::vector<std::string> names_of(const MlpSpec& spec, const std::string& prefix) {
  std::vector<std::string> out;
  for (const auto& [name, shape] : parameter_layout(spec, prefix)) out.push_back(name);
  return out;
}

void check_pair(const MlpSpec& g, const MlpSpec& d) {
  if (g.widths.back() != d.widths.front()) {
    throw ConfigError("generator output width " + std::to_string(g.widths.back()) +
                      " differs from discriminator input width " +
                      std::to_string(d.widths.front()));
  }
  if (d.widths.back() != 1) throw ConfigError("discriminator output width must be 1");
}

std::vector<Expression> identifiers(const std::vector<std::pair<std::string, Shape>>& layout) {
  std::vector<Expression> out;
  for (const auto& [name, shape] : layout) out.push_back(parameter(name, shape));
  return out;
}

}  // namespace

Expression tanh(const Expression& x) { return 1.0 - 2.0 / (exp(2.0 * x) + 1.0); }

void validate(const MlpSpec& spec) {
  check_widths(spec);
  if (spec.widths.size() < 3) throw ConfigError("MLP needs at least one hidden layer");
}

std::vector<std::pair<std::string, Shape>> parameter_layout(const MlpSpec& spec,
                                                            const std::string& prefix) {
  std::vector<std::pair<std::string, Shape>> out;
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    out.emplace_back(prefix + ".W" + std::to_string(l),
                     Shape{spec.widths[l], spec.widths[l + 1]});
    if (spec.has_bias(l)) {
      out.emplace_back(prefix + ".b" + std::to_string(l), Shape{1, spec.widths[l + 1]});
    }
  }
  return out;
}

GanModel GanModel::from_parameters(MlpSpec generator, MlpSpec discriminator,
                                   std::vector<Tensor> theta_g, std::vector<Tensor> theta_d) {
  check_widths(generator);
  check_widths(discriminator);
  check_pair(generator, discriminator);
  GanModel m;
  m.gen_ = std::move(generator);
  m.disc_ = std::move(discriminator);
  auto check = [](const MlpSpec& spec, const std::string& prefix, const std::vector<Tensor>& ts) {
    const auto layout = parameter_layout(spec, prefix);
    if (layout.size() != ts.size()) {
      throw ShapeError(prefix + ": expected " + std::to_string(layout.size()) +
                       " parameter tensors, got " + std::to_string(ts.size()));
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (ts[i].shape() != layout[i].second) {
        throw ShapeError(layout[i].first + ": expected shape " +
                         shape_string(layout[i].second) + ", got " +
                         shape_string(ts[i].shape()));
      }
    }
  };
  check(m.gen_, "G", theta_g);
  check(m.disc_, "D", theta_d);
  m.theta_g_ = std::move(theta_g);
  m.theta_d_ = std::move(theta_d);
  m.g_names_ = names_of(m.gen_, "G");
  m.d_names_ = names_of(m.disc_, "D");
  return m;
}

std::vector<Expression> GanModel::g_params() const { return identifiers(parameter_layout(gen_, "G")); }
std::vector<Expression> GanModel::d_params() const { return identifiers(parameter_layout(disc_, "D")); }

void GanModel::bind(Environment& env) const {
  for (std::size_t i = 0; i < theta_g_.size(); ++i) env.bind(g_names_[i], theta_g_[i]);
  for (std::size_t i = 0; i < theta_d_.size(); ++i) env.bind(d_names_[i], theta_d_[i]);
}

Environment GanModel::environment() const {
  Environment env;
  bind(env);
  return env;
}

std::size_t GanModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : theta_g_) n += t.numel();
  for (const auto& t : theta_d_) n += t.numel();
  return n;
}

GanModel init_model(const MlpSpec& generator, const MlpSpec& discriminator,
                    std::size_t latent_dim, std::size_t data_dim, std::uint64_t seed) {
  validate(generator);
  validate(discriminator);
  if (generator.widths.front() != latent_dim) {
    throw ConfigError("generator input width must equal the latent dimension");
  }
  if (generator.widths.back() != data_dim) {
    throw ConfigError("generator output width must equal the data dimension");
  }
  check_pair(generator, discriminator);
  Rng rng(seed);
  auto draw = [&rng](const MlpSpec& spec, const std::string& prefix) {
    std::vector<Tensor> out;
    for (const auto& [name, shape] : parameter_layout(spec, prefix)) {
      if (name.find(".b") != std::string::npos) {
        out.push_back(Tensor::zeros(shape));
        continue;
      }
      const double bound = 1.0 / std::sqrt(static_cast<double>(shape[0]));
      std::vector<double> v(shape_numel(shape));
      for (auto& x : v) x = rng.uniform(-bound, bound);
      out.emplace_back(shape, std::move(v));
    }
    return out;
  };
  auto tg = draw(generator, "G");
  auto td = draw(discriminator, "D");
  return GanModel::from_parameters(generator, discriminator, std::move(tg), std::move(td));
}

Expression mlp_apply(const MlpSpec& spec, const std::vector<Expression>& params,
                     const Expression& x) {
  if (x.shape().size() != 2 || x.shape()[1] != spec.widths.front()) {
    throw ShapeError("mlp input must be [N x " + std::to_string(spec.widths.front()) +
                     "], got " + shape_string(x.shape()));
  }
  const std::size_t n = x.shape()[0];
  Expression h = x;
  std::size_t k = 0;
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    h = matmul(h, params.at(k++));
    if (spec.has_bias(l)) h = h + broadcast_rows(params.at(k++), n);
    if (l + 1 < spec.layers()) {
      h = spec.activation == Activation::kTanh ? tanh(h) : leaky_relu(h, spec.slope);
    }
  }
  return h;
}

Expression generate(const GanModel& model, const Expression& z) {
  return generate(model, z, model.g_params());
}

Expression generate(const GanModel& model, const Expression& z,
                    const std::vector<Expression>& theta_g) {
  return mlp_apply(model.generator_spec(), theta_g, z);
}

Expression discriminate(const GanModel& model, const Expression& x) {
  return discriminate(model, x, model.d_params());
}

Expression discriminate(const GanModel& model, const Expression& x,
                        const std::vector<Expression>& theta_d) {
  return mlp_apply(model.discriminator_spec(), theta_d, x);
}

Expression critic_value(const GanModel& model, const Expression& z) {
  return critic_value(model, z, model.d_params(), model.g_params());
}

Expression critic_value(const GanModel& model, const Expression& z,
                        const std::vector<Expression>& theta_d,
                        const std::vector<Expression>& theta_g) {
  return discriminate(model, generate(model, z, theta_g), theta_d);
}

Losses losses(LossKind kind, const Expression& d_real, const Expression& d_fake) {
  switch (kind) {
    case LossKind::kWasserstein:
      return {mean(d_fake) - mean(d_real), -mean(d_fake)};
    case LossKind::kHinge:
      return {mean(relu(1.0 - d_real)) + mean(relu(1.0 + d_fake)), -mean(d_fake)};
  }
  throw Error("unknown loss kind");
}

std::pair<double, double> losses(LossKind kind, double d_real, double d_fake) {
  const auto l = losses(kind, constant(d_real), constant(d_fake));
  const Environment env;
  return {evaluate(l.d, env).item(), evaluate(l.g, env).item()};
}

const char* loss_name(LossKind kind) {
  return kind == LossKind::kHinge ? "hinge" : "wasserstein";
}

LossKind parse_loss(const std::string& name) {
  if (name == "wasserstein") return LossKind::kWasserstein;
  if (name == "hinge") return LossKind::kHinge;
  throw ConfigError("unknown loss '" + name + "' (expected wasserstein or hinge)");
}

Tensor sample_latents(Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<double> v(n * dim);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor({n, dim}, std::move(v));
}

}  // namespace logan
