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

#include "logan/game.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "logan/autodiff.hpp"
#include "logan/errors.hpp"
#include "logan/latent.hpp"

namespace logan {

namespace {

void append(std::vector<double>& out, const Tensor& t) {
  out.insert(out.end(), t.values().begin(), t.values().end());
}

std::vector<double> flatten(const std::vector<Tensor>& ts) {
  std::vector<double> out;
  for (const auto& t : ts) append(out, t);
  return out;
}

double inf_norm(std::span<const double> v) { return max_abs(v); }

Expression identifier_of(const Environment& env, const std::string& name) {
  return parameter(name, env.at(name).shape());
}

std::map<std::string, Expression> step_map(const Expression& loss,
                                           const std::vector<std::string>& names,
                                           const Environment& env, double scale) {
  const auto grads = gradient_exprs(loss, names);
  std::map<std::string, Expression> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    out.emplace(names[i], identifier_of(env, names[i]) + constant(scale) * grads[i]);
  }
  return out;
}

std::vector<double> direction(const Game& game, const DynamicsConfig& config) {
  switch (config.method) {
    case DynamicsMethod::kSimGrad: return simultaneous_grad(game);
    case DynamicsMethod::kSga:
      return sga_adjust(simultaneous_grad(game), game_hessian(game), config.lambda);
    case DynamicsMethod::kUnrolled: {
      std::vector<double> out;
      for (std::size_t p = 0; p < game.players.size(); ++p) {
        std::map<std::string, Expression> opponents;
        for (std::size_t q = 0; q < game.players.size(); ++q) {
          if (q == p) continue;
          auto m = step_map(game.players[q].loss, game.players[q].params, game.env, -config.alpha);
          opponents.insert(m.begin(), m.end());
        }
        const auto& me = game.players[p];
        for (const auto& g : gradient(substitute(me.loss, opponents), me.params, game.env)) {
          append(out, g);
        }
      }
      return out;
    }
    case DynamicsMethod::kLogan: {
      if (!game.latent_player) throw Error("logan dynamics need a latent player");
      const auto& latent = game.players[*game.latent_player];
      const auto step = step_map(latent.loss, latent.params, game.env, -config.alpha);
      std::vector<double> out;
      for (std::size_t p = 0; p < game.players.size(); ++p) {
        const auto& me = game.players[p];
        if (p == *game.latent_player) {
          for (const auto& n : me.params) append(out, Tensor::zeros(game.env.at(n).shape()));
          continue;
        }
        for (const auto& g : gradient(substitute(me.loss, step), me.params, game.env)) {
          append(out, g);
        }
      }
      return out;
    }
  }
  throw Error("unknown dynamics method");
}

Tensor slice(const Tensor& t, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
  std::vector<double> v;
  for (std::size_t r = r0; r < r1; ++r) {
    for (std::size_t c = c0; c < c1; ++c) v.push_back(t.at(r, c));
  }
  return Tensor({r1 - r0, c1 - c0}, std::move(v));
}

}  // namespace

void Game::validate() const {
  if (players.empty()) throw Error("game has no players");
  for (const auto& p : players) {
    if (!p.loss || !p.loss.is_scalar()) throw ShapeError("player '" + p.name + "' loss must be scalar");
    const auto ids = free_identifiers(p.loss);
    for (const auto& n : p.params) {
      if (!env.contains(n)) throw UnboundIdentifierError(n);
      if (std::find(ids.begin(), ids.end(), n) == ids.end()) {
        throw Error("player '" + p.name + "' loss does not depend on its parameter '" + n + "'");
      }
    }
  }
  if (latent_player && *latent_player >= players.size()) throw Error("latent player out of range");
  if (dim() > kMaxGameDim) throw Error("game exceeds the dense cap of 512 parameters");
}

std::vector<std::string> Game::parameter_names() const {
  std::vector<std::string> out;
  for (const auto& p : players) out.insert(out.end(), p.params.begin(), p.params.end());
  return out;
}

std::size_t Game::dim() const {
  std::size_t n = 0;
  for (const auto& name : parameter_names()) n += env.at(name).numel();
  return n;
}

std::vector<double> Game::flat_parameters() const {
  std::vector<double> out;
  for (const auto& name : parameter_names()) append(out, env.at(name));
  return out;
}

void Game::set_flat_parameters(std::span<const double> theta) {
  if (theta.size() != dim()) throw ShapeError("set_flat_parameters: length mismatch");
  std::size_t k = 0;
  for (const auto& name : parameter_names()) {
    const Shape shape = env.at(name).shape();
    const std::size_t n = shape_numel(shape);
    env.bind(name, Tensor(shape, {theta.begin() + k, theta.begin() + k + n}));
    k += n;
  }
}

Game bilinear_game(double x, double y) {
  const auto px = parameter("x", {}), py = parameter("y", {});
  Game g;
  g.players = {{"x", {"x"}, px * py}, {"y", {"y"}, -(px * py)}};
  g.env = {{"x", Tensor::scalar(x)}, {"y", Tensor::scalar(y)}};
  return g;
}

Game potential_game(double x, double y) {
  const auto px = parameter("x", {}), py = parameter("y", {});
  const auto l = square(px) + square(py);
  Game g;
  g.players = {{"x", {"x"}, l}, {"y", {"y"}, l}};
  g.env = {{"x", Tensor::scalar(x)}, {"y", Tensor::scalar(y)}};
  return g;
}

Game quadratic_game(const std::vector<std::size_t>& dims, const std::vector<Tensor>& q,
                    const std::vector<Tensor>& b, const std::vector<double>& theta0) {
  const std::size_t players = dims.size();
  std::size_t total = 0;
  std::vector<std::size_t> offset;
  for (auto d : dims) {
    offset.push_back(total);
    total += d;
  }
  if (q.size() != players || b.size() != players) throw ShapeError("quadratic_game: one Q and b per player");
  if (theta0.size() != total) throw ShapeError("quadratic_game: theta0 length mismatch");
  std::vector<Expression> theta;
  Game g;
  for (std::size_t p = 0; p < players; ++p) {
    const std::string name = "p" + std::to_string(p);
    theta.push_back(parameter(name, {1, dims[p]}));
    g.env.bind(name, Tensor({1, dims[p]}, {theta0.begin() + offset[p],
                                          theta0.begin() + offset[p] + dims[p]}));
  }
  for (std::size_t p = 0; p < players; ++p) {
    if (q[p].shape() != Shape{total, total}) throw ShapeError("quadratic_game: Q must be square over all players");
    if (b[p].shape() != Shape{1, total}) throw ShapeError("quadratic_game: b must be [1 x dim]");
    Expression loss;
    auto add = [&loss](const Expression& e) { loss = loss ? loss + e : e; };
    for (std::size_t a = 0; a < players; ++a) {
      for (std::size_t c = 0; c < players; ++c) {
        const Tensor block = slice(q[p], offset[a], offset[a] + dims[a], offset[c], offset[c] + dims[c]);
        add(0.5 * sum(matmul(matmul(theta[a], constant(block)), transpose(theta[c]))));
      }
      add(sum(theta[a] * constant(slice(b[p], 0, 1, offset[a], offset[a] + dims[a]))));
    }
    g.players.push_back({"p" + std::to_string(p), {"p" + std::to_string(p)}, loss});
  }
  return g;
}

Game logan_toy_game(double z, double d, double g, double dz, double eta) {
  const auto pdz = parameter("dz", {}), pd = parameter("d", {}), pg = parameter("g", {});
  const auto f = pd * pg * (constant(z) + pdz);
  Game game;
  game.players = {{"latent", {"dz"}, -(constant(eta) * f)}, {"D", {"d"}, f}, {"G", {"g"}, -f}};
  game.env = {{"dz", Tensor::scalar(dz)}, {"d", Tensor::scalar(d)}, {"g", Tensor::scalar(g)}};
  game.latent_player = 0;
  return game;
}

std::vector<double> simultaneous_grad(const Game& game) {
  game.validate();
  std::vector<double> out;
  for (const auto& p : game.players) {
    for (const auto& g : gradient(p.loss, p.params, game.env)) append(out, g);
  }
  return out;
}

Tensor game_hessian(const Game& game) {
  game.validate();
  const auto names = game.parameter_names();
  std::vector<Expression> ids;
  for (const auto& n : names) ids.push_back(identifier_of(game.env, n));
  const std::size_t dim = game.dim();

  Evaluator ev(game.env);
  std::vector<double> h;
  h.reserve(dim * dim);
  for (const auto& p : game.players) {
    const auto grads = gradient_exprs(p.loss, p.params);
    for (const auto& g : grads) {
      for (std::size_t e = 0; e < g.numel(); ++e) {
        Tensor onehot = Tensor::zeros(g.shape());
        onehot[e] = 1.0;
        for (const auto& r : gradient_exprs(sum(g * constant(onehot)), ids)) {
          append(h, ev.value(r));
        }
      }
    }
  }
  return Tensor({dim, dim}, std::move(h));
}

Tensor antisymmetric_part(const Tensor& h) {
  if (h.rank() != 2 || h.rows() != h.cols()) throw ShapeError("antisymmetric_part: square matrix required");
  const std::size_t n = h.rows();
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = 0.5 * (h.at(i, j) - h.at(j, i));
  }
  return Tensor({n, n}, std::move(a));
}

std::vector<double> sga_adjust(std::span<const double> g, const Tensor& h, double lambda) {
  const Tensor a = antisymmetric_part(h);
  if (a.rows() != g.size()) throw ShapeError("sga_adjust: gradient and Hessian sizes differ");
  std::vector<double> out(g.begin(), g.end());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) acc += a.at(j, i) * g[j];
    out[i] += lambda * acc;
  }
  return out;
}

SgaCheckReport logan_approx_sga_check(const GanModel& model, const Tensor& z, double alpha,
                                      double eta, bool block_d, bool block_g) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error("eta must lie in (0, 1]");
  if (z.rank() != 2 || z.cols() != model.latent_dim()) throw ShapeError("z must be [N x latent]");
  const Shape zs = z.shape();
  Environment env = model.environment();

  // Latent step dz = alpha * df/dz at z.
  env.bind("latent.z", z);
  const Expression zin = input("latent.z", zs);
  const Tensor g0 = gradient(sum(critic_value(model, zin)), {"latent.z"}, env)[0];
  Tensor dz0 = g0;
  for (auto& v : dz0.mutable_data()) v *= alpha;

  // Three-player game at z' = z + dz.
  const Expression dz = parameter("latent.dz", zs);
  const Expression f = sum(critic_value(model, constant(z) + dz));
  Game game;
  game.players = {{"latent", {"latent.dz"}, -(constant(eta) * f)},
                  {"D", model.d_names(), f},
                  {"G", model.g_names(), -f}};
  game.env = model.environment();
  game.env.bind("latent.dz", dz0);
  game.latent_player = 0;
  const auto g = simultaneous_grad(game);
  const Tensor h = game_hessian(game);

  const std::size_t nz = z.numel();
  const std::size_t n_params = g.size() - nz;

  SgaCheckReport rep;
  rep.plain.assign(g.begin() + static_cast<std::ptrdiff_t>(nz), g.end());
  rep.sga = rep.plain;
  for (std::size_t i = 0; i < n_params; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < nz; ++j) acc += h.at(nz + i, j) * (-g[j] / eta);
    rep.sga[i] += alpha * acc;
  }

  // LOGAN gradients through an unclipped GD step.
  LatentOptConfig cfg{LatentMethod::kGD, alpha, 1.0, 0.0, 1.0, 1, 0, false};
  std::vector<Expression> td = model.d_params(), tg = model.g_params();
  std::vector<Expression> inner_d = td, inner_g = tg;
  if (block_d) for (auto& e : inner_d) e = stop_gradient(e);
  if (block_g) for (auto& e : inner_g) e = stop_gradient(e);
  const auto step = refine_latent(
      [&](const Expression& zz) { return critic_value(model, zz, inner_d, inner_g); }, zin, cfg);
  const Expression fz = sum(critic_value(model, step.z_prime));
  rep.logan = flatten(gradient(fz, model.d_names(), env));
  for (const auto& t : gradient(-fz, model.g_names(), env)) append(rep.logan, t);

  std::vector<double> diff(rep.sga.size()), adj(rep.sga.size());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = rep.logan[i] - rep.sga[i];
    adj[i] = rep.sga[i] - rep.plain[i];
  }
  rep.abs_discrepancy = inf_norm(diff);
  rep.adjustment_norm = inf_norm(adj);
  rep.discrepancy = rep.abs_discrepancy / std::max(inf_norm(rep.sga), 1e-300);
  return rep;
}

UnrolledResult unrolled_gradient(const Expression& f, const std::vector<std::string>& theta_d,
                                 const std::vector<std::string>& theta_g, const Environment& env,
                                 double alpha, UnrollWhich which) {
  const bool unroll_d = which == UnrollWhich::kUnrollD;
  const auto& stepper = unroll_d ? theta_d : theta_g;
  const auto& target = unroll_d ? theta_g : theta_d;
  // D descends f, G ascends it.
  const double sign = unroll_d ? -1.0 : 1.0;

  const auto grads = gradient_exprs(f, stepper);
  std::map<std::string, Expression> step;
  Expression penalty;
  for (std::size_t i = 0; i < stepper.size(); ++i) {
    step.emplace(stepper[i], identifier_of(env, stepper[i]) + constant(sign * alpha) * grads[i]);
    const Expression sq = sum(square(grads[i]));
    penalty = penalty ? penalty + sq : sq;
  }
  UnrolledResult out;
  out.exact = flatten(gradient(substitute(f, step), target, env));
  out.taylor = flatten(gradient(f + constant(sign * alpha) * penalty, target, env));
  std::vector<double> diff(out.exact.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = out.exact[i] - out.taylor[i];
  out.abs_error = inf_norm(diff);
  out.rel_error = out.abs_error / std::max(inf_norm(out.exact), 1e-300);
  return out;
}

UnrolledResult unrolled_gradient(const GanModel& model, const Tensor& z, double alpha,
                                 UnrollWhich which) {
  const Expression f = mean(critic_value(model, constant(z)));
  return unrolled_gradient(f, model.d_names(), model.g_names(), model.environment(), alpha, which);
}

const char* dynamics_name(DynamicsMethod m) {
  switch (m) {
    case DynamicsMethod::kSimGrad: return "simgrad";
    case DynamicsMethod::kSga: return "sga";
    case DynamicsMethod::kUnrolled: return "unrolled";
    case DynamicsMethod::kLogan: return "logan";
  }
  return "?";
}

DynamicsMethod parse_dynamics(const std::string& name) {
  for (auto m : {DynamicsMethod::kSimGrad, DynamicsMethod::kSga, DynamicsMethod::kUnrolled,
                 DynamicsMethod::kLogan}) {
    if (name == dynamics_name(m)) return m;
  }
  throw ConfigError("unknown dynamics method '" + name + "'");
}

Trajectory simulate_dynamics(Game game, const DynamicsConfig& config) {
  if (!(config.lr > 0.0)) throw Error("simulate_dynamics: lr must be positive");
  if (config.steps < 0) throw Error("simulate_dynamics: steps must be non-negative");
  game.validate();
  if (config.method == DynamicsMethod::kLogan && !game.latent_player) {
    throw Error("logan dynamics need a latent player");
  }
  Trajectory t;
  t.names = game.parameter_names();
  for (int step = 0;; ++step) {
    auto theta = game.flat_parameters();
    std::vector<double> dir;
    try {
      dir = direction(game, config);
    } catch (const NonFiniteError&) {
      t.diverged = true;
      break;
    }
    t.points.push_back({step, theta, l2_norm(theta), l2_norm(dir)});
    if (t.points.back().theta_norm > 1e6) {
      t.diverged = true;
      break;
    }
    if (step == config.steps) break;
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= config.lr * dir[i];
    if (!std::all_of(theta.begin(), theta.end(), [](double v) { return std::isfinite(v); })) {
      t.diverged = true;
      break;
    }
    game.set_flat_parameters(theta);
  }
  return t;
}

}  // namespace logan
