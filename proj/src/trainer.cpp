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

#include "logan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "logan/autodiff.hpp"
#include "logan/errors.hpp"

namespace logan {

namespace {

// Latent refinement reads the parameters through aliases so the paths
// through dz get their own gradient entries on the same tape.
std::string alias(const std::string& name) { return "latent/" + name; }

std::vector<Expression> alias_params(const std::vector<std::string>& names,
                                     const std::vector<Tensor>& values) {
  std::vector<Expression> out;
  for (std::size_t i = 0; i < names.size(); ++i) out.push_back(parameter(alias(names[i]), values[i].shape()));
  return out;
}

// Some aliases never reach the loss (the last bias has no z-derivative);
// their path term is zero.
std::vector<Expression> alias_gradients(const Expression& loss, const std::vector<std::string>& names,
                                        const std::vector<Tensor>& shapes) {
  const auto ids = free_identifiers(loss);
  std::vector<std::string> present;
  for (const auto& n : names) {
    if (std::find(ids.begin(), ids.end(), alias(n)) != ids.end()) present.push_back(alias(n));
  }
  const auto grads = gradient_exprs(loss, present);
  std::vector<Expression> out;
  std::size_t k = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (k < present.size() && present[k] == alias(names[i])) {
      out.push_back(grads[k++]);
    } else {
      out.push_back(constant(Tensor::zeros(shapes[i].shape())));
    }
  }
  return out;
}

double mean_row_norm(const Tensor& t) {
  double s = 0.0;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < t.cols(); ++c) row += t.at(r, c) * t.at(r, c);
    s += std::sqrt(row);
  }
  return s / static_cast<double>(t.rows());
}

Tensor minus(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ShapeError("shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  Tensor out = a;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b[i];
  return out;
}

double squared_change(const std::vector<Tensor>& before, const std::vector<Tensor>& after) {
  if (before.size() != after.size()) throw ShapeError("parameter lists differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) s += squared_norm(minus(after[i], before[i]).data());
  return s;
}

bool all_finite(const std::vector<Tensor>& ts) {
  for (const auto& t : ts) {
    if (!t.all_finite()) return false;
  }
  return true;
}

std::vector<Tensor> add(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  std::vector<Tensor> out = a;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < out[i].numel(); ++j) out[i][j] += b[i][j];
  }
  return out;
}

void apply_update(std::vector<Tensor>& theta, const std::vector<Tensor>& grad, std::vector<Tensor>& v,
                  std::uint64_t t, OptimiserKind kind, double lr) {
  if (kind == OptimiserKind::kSgd) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      for (std::size_t j = 0; j < theta[i].numel(); ++j) theta[i][j] -= lr * grad[i][j];
    }
    return;
  }
  if (v.empty()) {
    for (const auto& g : grad) v.push_back(Tensor::zeros(g.shape()));
  }
  // beta1 = 0, so the first moment is the gradient itself.
  const double correction = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    for (std::size_t j = 0; j < theta[i].numel(); ++j) {
      const double g = grad[i][j];
      v[i][j] = kAdamBeta2 * v[i][j] + (1.0 - kAdamBeta2) * g * g;
      theta[i][j] -= lr * g / (std::sqrt(v[i][j] / correction) + kAdamEpsilon);
    }
  }
}

}  // namespace

const char* optimiser_name(OptimiserKind k) { return k == OptimiserKind::kSgd ? "sgd" : "adam"; }

OptimiserKind parse_optimiser(const std::string& name) {
  if (name == "sgd") return OptimiserKind::kSgd;
  if (name == "adam") return OptimiserKind::kAdam;
  throw ConfigError("unknown optimiser '" + name + "' (expected sgd or adam)");
}

void TrainConfig::validate() const {
  if (batch < 1) throw ConfigError("batch must be at least 1");
  if (!(lr_d > 0.0) || !(lr_g > 0.0)) throw ConfigError("learning rates must be positive");
  if (latent_dim < 1) throw ConfigError("latent_dim must be at least 1");
  if (metrics_interval < 1) throw ConfigError("metrics_interval must be at least 1");
  latent.validate();
  data.validate();
  logan::validate(generator_spec());
  logan::validate(discriminator_spec());
  if (eval_interval > 0 && eval.samples < 2) throw ConfigError("eval.samples must be at least 2");
}

MlpSpec TrainConfig::generator_spec() const {
  MlpSpec s;
  s.widths.push_back(latent_dim);
  s.widths.insert(s.widths.end(), g_hidden.begin(), g_hidden.end());
  s.widths.push_back(data.dim());
  s.slope = slope;
  s.final_bias = false;
  return s;
}

MlpSpec TrainConfig::discriminator_spec() const {
  MlpSpec s;
  s.widths.push_back(data.dim());
  s.widths.insert(s.widths.end(), d_hidden.begin(), d_hidden.end());
  s.widths.push_back(1);
  s.slope = slope;
  return s;
}

TrainState initial_state(const TrainConfig& config) {
  config.validate();
  TrainState s;
  s.model = init_model(config.generator_spec(), config.discriminator_spec(), config.latent_dim,
                       config.data.dim(), derive_seed(config.seed, 1));
  s.rng = Rng(derive_seed(config.seed, 2));
  return s;
}

UpdateNorms update_norm_diagnostics(const std::vector<Tensor>& d_before,
                                    const std::vector<Tensor>& d_after,
                                    const std::vector<Tensor>& g_before,
                                    const std::vector<Tensor>& g_after) {
  UpdateNorms n;
  n.d = std::sqrt(squared_change(d_before, d_after));
  n.g = std::sqrt(squared_change(g_before, g_after));
  n.diff = n.d - n.g;
  return n;
}

UpdateNorms update_norm_diagnostics(const GanModel& before, const GanModel& after) {
  return update_norm_diagnostics(before.theta_d(), after.theta_d(), before.theta_g(), after.theta_g());
}

DeltaZ delta_z_diagnostics(const GanModel& model, const Tensor& z, const Tensor& z_prime) {
  if (z.shape() != z_prime.shape() || z.rank() != 2) throw ShapeError("delta_z_diagnostics: z and z' differ in shape");
  Environment env = model.environment();
  const Expression f = critic_value(model, input("diag.z", z.shape()));
  env.bind("diag.z", z);
  const Tensor f0 = evaluate(f, env);
  env.bind("diag.z", z_prime);
  const Tensor f1 = evaluate(f, env);
  DeltaZ d;
  d.dz_norm = mean_row_norm(minus(z_prime, z));
  double s = 0.0;
  for (std::size_t i = 0; i < f0.numel(); ++i) s += std::abs(f1[i] - f0[i]);
  d.df_abs = s / static_cast<double>(f0.numel());
  return d;
}

std::vector<Tensor> StepGradients::d_total(const AblationFlags& flags) const {
  return flags.block_d_term || d_via_d.empty() ? d_direct : add(d_direct, d_via_d);
}

std::vector<Tensor> StepGradients::g_total(const AblationFlags& flags) const {
  return flags.block_g_term || g_via_g.empty() ? g_direct : add(g_direct, g_via_g);
}

struct Trainer::Graph {
  std::vector<std::string> d_names, g_names;
  Expression l_d, l_g, r_z, z_prime;
  std::optional<Expression> curvature;
  std::vector<Expression> d_direct, d_via_d, g_direct, g_via_g;
};

Trainer::Trainer(const TrainConfig& config) : config_(config) {
  config_.validate();
  build(initial_state(config_).model);
}

Trainer::Trainer(const TrainConfig& config, const GanModel& architecture) : config_(config) {
  if (config_.batch < 1) throw ConfigError("batch must be at least 1");
  if (!(config_.lr_d > 0.0) || !(config_.lr_g > 0.0)) throw ConfigError("learning rates must be positive");
  config_.latent.validate();
  config_.data.validate();
  if (architecture.data_dim() != config_.data.dim()) throw ConfigError("model and data dimensions differ");
  config_.latent_dim = architecture.latent_dim();
  build(architecture);
}

void Trainer::build(const GanModel& shape_model) {
  auto g = std::make_shared<Graph>();
  g->d_names = shape_model.d_names();
  g->g_names = shape_model.g_names();

  const Expression z = input("train.z", {config_.batch, config_.latent_dim});
  const Expression x = input("train.x", {config_.batch, config_.data.dim()});
  g->z_prime = z;
  const bool latent = config_.latent_enabled;
  if (latent) {
    const auto inner_d = alias_params(g->d_names, shape_model.theta_d());
    const auto inner_g = alias_params(g->g_names, shape_model.theta_g());
    const auto step = refine_latent(
        [&](const Expression& zz) { return critic_value(shape_model, zz, inner_d, inner_g); }, z,
        config_.latent);
    g->z_prime = step.z_prime;
    g->r_z = latent_regulariser(step.delta_z, config_.latent.w_r);
    if (step.curvature) g->curvature = mean(*step.curvature);
  }
  const Losses l = losses(config_.loss, discriminate(shape_model, x), critic_value(shape_model, g->z_prime));
  g->l_d = latent ? l.d + g->r_z : l.d;
  g->l_g = latent ? l.g + g->r_z : l.g;

  g->d_direct = gradient_exprs(g->l_d, g->d_names);
  g->g_direct = gradient_exprs(g->l_g, g->g_names);
  if (latent && !config_.ablation.block_d_term) g->d_via_d = alias_gradients(g->l_d, g->d_names, shape_model.theta_d());
  if (latent && !config_.ablation.block_g_term) g->g_via_g = alias_gradients(g->l_g, g->g_names, shape_model.theta_g());
  graph_ = std::move(g);

  if (config_.eval_interval > 0) {
    config_.eval.seed = derive_seed(config_.seed, 3);
    reference_ = reference_summary(config_.data, config_.eval.reference_samples, config_.eval.seed);
  }
}

StepGradients Trainer::gradients(const GanModel& model, const Tensor& z, const Tensor& x) const {
  const Graph& g = *graph_;
  Environment env = model.environment();
  if (config_.latent_enabled) {
    for (std::size_t i = 0; i < g.d_names.size(); ++i) env.bind(alias(g.d_names[i]), model.theta_d()[i]);
    for (std::size_t i = 0; i < g.g_names.size(); ++i) env.bind(alias(g.g_names[i]), model.theta_g()[i]);
  }
  env.bind("train.z", z);
  env.bind("train.x", x);
  Evaluator ev(env);
  StepGradients out;
  auto values = [&ev](const std::vector<Expression>& es) {
    std::vector<Tensor> v;
    for (const auto& e : es) v.push_back(ev.value(e));
    return v;
  };
  out.l_d = ev.value(g.l_d).item();
  out.l_g = ev.value(g.l_g).item();
  if (g.r_z) out.r_z = ev.value(g.r_z).item();
  out.z = z;
  out.z_prime = ev.value(g.z_prime);
  if (g.curvature) out.curvature_mean = ev.value(*g.curvature).item();
  out.d_direct = values(g.d_direct);
  out.d_via_d = values(g.d_via_d);
  out.g_direct = values(g.g_direct);
  out.g_via_g = values(g.g_via_g);
  return out;
}

MetricsRecord Trainer::step(TrainState& state) const {
  const std::uint64_t next = state.step + 1;
  const Tensor z = sample_latents(state.rng, config_.batch, config_.latent_dim);
  const Tensor x = config_.data.sample(state.rng, config_.batch);

  const StepGradients sg = gradients(state.model, z, x);
  const auto gd = sg.d_total(config_.ablation);
  auto gg = sg.g_total(config_.ablation);
  if (!std::isfinite(sg.l_d) || !std::isfinite(sg.l_g) || !all_finite(gd) || !all_finite(gg)) {
    std::ostringstream os;
    os << "non-finite loss or gradient at step " << next << ": L_D=" << sg.l_d << " L_G=" << sg.l_g
       << " R_z=" << sg.r_z;
    throw NonFiniteError(os.str());
  }

  const GanModel before = state.model;
  OptimiserState& opt = state.optimiser;
  ++opt.t;
  apply_update(state.model.theta_d(), gd, opt.v_d, opt.t, config_.optimiser, config_.lr_d);
  if (config_.alternating) {
    gg = gradients(state.model, z, x).g_total(config_.ablation);
    if (!all_finite(gg)) throw NonFiniteError("non-finite generator gradient at step " + std::to_string(next));
  }
  apply_update(state.model.theta_g(), gg, opt.v_g, opt.t, config_.optimiser, config_.lr_g);
  state.step = next;

  MetricsRecord rec;
  rec.step = next;
  rec.l_d = sg.l_d;
  rec.l_g = sg.l_g;
  rec.r_z = sg.r_z;
  const DeltaZ dz = delta_z_diagnostics(before, z, sg.z_prime);
  rec.dz_norm = dz.dz_norm;
  rec.df_abs = dz.df_abs;
  const UpdateNorms un = update_norm_diagnostics(before, state.model);
  rec.dtheta_d = un.d;
  rec.dtheta_g = un.g;
  rec.dtheta_diff = un.diff;
  rec.curvature_mean = sg.curvature_mean;
  if (!all_finite(state.model.theta_d()) || !all_finite(state.model.theta_g()) ||
      !std::isfinite(rec.dz_norm) || !std::isfinite(rec.df_abs) || !std::isfinite(un.diff)) {
    std::ostringstream os;
    os << "non-finite parameters after the update at step " << next << ": L_D=" << sg.l_d << " L_G=" << sg.l_g
       << " |dtheta_D|=" << un.d << " |dtheta_G|=" << un.g;
    throw NonFiniteError(os.str());
  }
  if (config_.eval_interval > 0 && next % config_.eval_interval == 0) {
    Rng eval_rng(config_.eval.seed);
    const Tensor ez = sample_latents(eval_rng, config_.eval.samples, config_.latent_dim);
    const auto m = sample_metrics(generate_samples(state.model, ez), config_.data, *reference_,
                                  config_.eval.radius);
    rec.proxy_fid = m.proxy_fid;
    rec.mode_coverage = m.modes_hit;
    rec.hq_fraction = m.hq_fraction;
  }
  return rec;
}

MetricsRecord train_step(TrainState& state, const TrainConfig& config) {
  return Trainer(config).step(state);
}

void train(const TrainConfig& config, TrainState& state, const TrainHooks& hooks) {
  const Trainer trainer(config);
  if (state.step == 0 && hooks.on_checkpoint) hooks.on_checkpoint(state);
  bool saved = true;
  while (state.step < config.steps) {
    const MetricsRecord rec = trainer.step(state);
    saved = false;
    if (hooks.on_record && rec.step % config.metrics_interval == 0) hooks.on_record(rec);
    if (hooks.on_checkpoint && config.checkpoint_interval > 0 && rec.step % config.checkpoint_interval == 0) {
      hooks.on_checkpoint(state);
      saved = true;
    }
  }
  if (!saved && hooks.on_checkpoint) hooks.on_checkpoint(state);
}

}  // namespace logan
