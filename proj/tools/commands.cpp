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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "logan/checkpoint.hpp"
#include "logan/errors.hpp"
#include "logan/game.hpp"
#include "logan/kernels.hpp"
#include "logan/report.hpp"

namespace logan::cli {

namespace fs = std::filesystem;

namespace {

std::string step_name(std::uint64_t step) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "step_%08llu.logn", static_cast<unsigned long long>(step));
  return buf;
}

// Keeps the header and the rows with step <= `step`.
std::string metrics_prefix(const std::string& text, std::uint64_t step) {
  std::string out = std::string(kMetricsHeader) + "\n";
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    if (std::stoull(line.substr(0, comma)) <= step) out += line + "\n";
  }
  return out;
}

EvalSettings final_eval_settings(const RunConfig& c) {
  EvalSettings s = c.train.eval;
  s.seed = derive_seed(c.train.seed, 3);
  s.latent = c.train.latent;
  return s;
}

template <typename Fn>
int guarded(std::ostream& log, Fn fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kConfigInvalid;
  } catch (const NonFiniteError& e) {
    log << "aborted: " << e.what() << "\n";
    return kNonFinite;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kError;
  }
}

}  // namespace

std::string resolve_out_dir(const GlobalOptions& opts, const std::string& config_dir,
                            const std::string& leaf) {
  if (!opts.out.empty()) return opts.out;
  if (!config_dir.empty()) return config_dir;
  const char* root = std::getenv("LOGAN_LAB_OUT");
  return (fs::path(root && *root ? root : "runs") / leaf).string();
}

RunConfig effective_config(const GlobalOptions& opts, bool config_required) {
  RunConfig c;
  if (!opts.config.empty()) {
    c = load_config(opts.config);
  } else if (config_required) {
    throw ConfigError("--config is required");
  } else {
    c.train.data = c.data.build();
    c.train.eval.latent = c.train.latent;
  }
  if (opts.seed) c.train.seed = *opts.seed;
  if (opts.threads < 1) throw ConfigError("--threads must be at least 1");
  return c;
}

RunSummary run_training(const RunConfig& config, const std::string& out_dir,
                        std::optional<TrainState> resume) {
  const fs::path out(out_dir);
  fs::create_directories(out / "checkpoints");
  write_text((out / "config.json").string(), to_json(config));

  TrainState state = resume ? std::move(*resume) : initial_state(config.train);
  const fs::path metrics_path = out / "metrics.csv";
  std::string metrics = std::string(kMetricsHeader) + "\n";
  if (resume && fs::exists(metrics_path)) metrics = metrics_prefix(read_text(metrics_path.string()), state.step);

  RunSummary summary;
  TrainHooks hooks;
  hooks.on_record = [&](const MetricsRecord& r) {
    metrics += metrics_row(r);
    summary.last = r;
  };
  hooks.on_checkpoint = [&](const TrainState& s) {
    save_checkpoint((out / "checkpoints" / step_name(s.step)).string(), s);
  };
  try {
    train(config.train, state, hooks);
  } catch (const NonFiniteError& e) {
    write_text(metrics_path.string(), metrics);
    write_text((out / "abort.txt").string(), std::string(e.what()) + "\n");
    save_checkpoint((out / "abort_state.logn").string(), state);
    throw;
  }
  write_text(metrics_path.string(), metrics);
  save_checkpoint((out / "final.logn").string(), state);

  const EvalSettings s = final_eval_settings(config);
  summary.final_metrics = evaluate_model(state.model, config.train.data, s);
  Rng rng(s.seed);
  const Tensor samples = generate_samples(state.model, sample_latents(rng, s.samples, state.model.latent_dim()));
  write_text((out / "samples.svg").string(),
             scatter_svg(samples, config.train.data.centers, config.run_id + " samples"));
  summary.steps = state.step;
  return summary;
}

int cmd_train(const GlobalOptions& opts, const std::string& resume, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig c = effective_config(opts, true);
    kernels::set_num_threads(opts.threads);
    const std::string out = resolve_out_dir(opts, c.output_dir, c.run_id);
    std::optional<TrainState> start;
    if (!resume.empty()) start = load_checkpoint(resume);
    const RunSummary s = run_training(c, out, std::move(start));
    log << "trained " << s.steps << " steps into " << out << "\n"
        << "final proxy_fid=" << format_real(s.final_metrics.proxy_fid)
        << " modes=" << s.final_metrics.modes_hit << "/" << c.train.data.centers.size()
        << " hq_fraction=" << format_real(s.final_metrics.hq_fraction) << "\n";
    return kOk;
  });
}

int cmd_eval(const GlobalOptions& opts, const std::string& checkpoint, std::ostream& log) {
  return guarded(log, [&] {
    if (checkpoint.empty()) throw ConfigError("--checkpoint is required");
    const RunConfig c = effective_config(opts, false);
    kernels::set_num_threads(opts.threads);
    const TrainState state = load_checkpoint(checkpoint);
    if (state.model.data_dim() != c.train.data.dim()) {
      throw ConfigError("checkpoint data dimension does not match the config's data");
    }
    EvalSettings s = c.train.eval;
    s.latent = c.train.latent;
    if (opts.seed) s.seed = *opts.seed;
    const fs::path out(resolve_out_dir(opts, c.output_dir, c.run_id + "-eval"));
    fs::create_directories(out);

    const auto plain = evaluate_model(state.model, c.train.data, s);
    log << "plain proxy_fid=" << format_real(plain.proxy_fid) << " modes=" << plain.modes_hit
        << " hq_fraction=" << format_real(plain.hq_fraction) << "\n";

    if (!c.eval_plan.truncation.empty()) {
      const auto curve = truncation_sweep(state.model, c.eval_plan.truncation, c.train.data, s);
      std::string csv = "s,proxy_fid,mode_coverage,hq_fraction\n";
      Curve fid{"proxy-FID", {}, {}}, hq{"hq fraction", {}, {}};
      for (const auto& p : curve) {
        csv += csv_line({format_real(p.s), format_real(p.proxy_fid), std::to_string(p.modes_hit),
                         format_real(p.hq_fraction)});
        fid.x.push_back(p.s);
        fid.y.push_back(p.proxy_fid);
        hq.x.push_back(p.s);
        hq.y.push_back(p.hq_fraction);
      }
      write_text((out / "truncation.csv").string(), csv);
      write_text((out / "truncation.svg").string(), curves_svg({fid, hq}, "truncation curve", "s", "metric"));
      log << "truncation: " << curve.size() << " points -> " << (out / "truncation.csv").string() << "\n";
    }
    if (!c.eval_plan.steps.empty()) {
      const auto sweep = eval_latent_steps_sweep(state.model, c.eval_plan.steps, c.train.data, s);
      std::string csv = "steps,proxy_fid,mode_coverage,hq_fraction,mean_critic_gain,ascent_violations\n";
      Curve fid{"proxy-FID", {}, {}};
      for (const auto& p : sweep) {
        csv += csv_line({std::to_string(p.steps), format_real(p.proxy_fid), std::to_string(p.modes_hit),
                         format_real(p.hq_fraction), format_real(p.mean_critic_gain),
                         std::to_string(p.ascent_violations)});
        fid.x.push_back(p.steps);
        fid.y.push_back(p.proxy_fid);
      }
      write_text((out / "eval_steps.csv").string(), csv);
      write_text((out / "eval_steps.svg").string(), curves_svg({fid}, "evaluation latent steps", "steps", "proxy-FID"));
      log << "eval steps: " << sweep.size() << " rows -> " << (out / "eval_steps.csv").string() << "\n";
    }
    return kOk;
  });
}

int cmd_sweep(const GlobalOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig base = effective_config(opts, true);
    const fs::path out(resolve_out_dir(opts, base.output_dir, base.run_id + "-sweep"));
    fs::create_directories(out);

    auto axis = [](const std::vector<double>& v, double fallback) {
      return v.empty() ? std::vector<double>{fallback} : v;
    };
    const LatentOptConfig& l = base.train.latent;
    struct Cell {
      std::size_t index;
      RunConfig config;
      std::optional<RunSummary> result;
      std::string status = "ok";
    };
    std::vector<Cell> cells;
    for (double a : axis(base.sweep.alpha, l.alpha)) {
      for (double b : axis(base.sweep.beta, l.beta)) {
        for (double w : axis(base.sweep.w_r, l.w_r)) {
          for (double cc : axis(base.sweep.c, l.c)) {
            for (std::size_t r = 0; r < base.sweep.replicates; ++r) {
              RunConfig c = base;
              const std::size_t i = cells.size();
              c.train.latent.alpha = a;
              c.train.latent.beta = b;
              c.train.latent.w_r = w;
              c.train.latent.c = cc;
              c.train.eval.latent = c.train.latent;
              // Cell i trains with seed derive_seed(master, i); cells share no state.
              c.train.seed = derive_seed(base.train.seed, i);
              c.run_id = base.run_id + "-cell" + std::to_string(i);
              cells.push_back({i, std::move(c), std::nullopt});
            }
          }
        }
      }
    }
    for (auto& cell : cells) cell.config.validate();

    const int workers = std::max(1, std::min<int>(opts.threads, static_cast<int>(cells.size())));
    kernels::set_num_threads(workers > 1 ? 1 : opts.threads);
    std::atomic<std::size_t> next{0};
    std::mutex log_mu;
    auto work = [&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) {
        Cell& cell = cells[i];
        char dir[32];
        std::snprintf(dir, sizeof dir, "cell_%04zu", cell.index);
        try {
          cell.result = run_training(cell.config, (out / dir).string(), std::nullopt);
        } catch (const std::exception& e) {
          cell.status = std::string("failed: ") + e.what();
        }
        std::lock_guard<std::mutex> lock(log_mu);
        log << dir << " " << cell.status << "\n";
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
      if (a.result.has_value() != b.result.has_value()) return a.result.has_value();
      if (!a.result) return false;
      return a.result->final_metrics.proxy_fid < b.result->final_metrics.proxy_fid;
    });
    std::string csv = "cell,seed,alpha,beta,w_r,c,status,proxy_fid,mode_coverage,hq_fraction,L_D,L_G\n";
    for (const auto& cell : cells) {
      const auto& l2 = cell.config.train.latent;
      std::string status = cell.status;
      std::replace(status.begin(), status.end(), ',', ';');
      std::replace(status.begin(), status.end(), '\n', ' ');
      std::vector<std::string> row{std::to_string(cell.index), std::to_string(cell.config.train.seed),
                                   format_real(l2.alpha), format_real(l2.beta), format_real(l2.w_r),
                                   format_real(l2.c), status};
      if (cell.result) {
        const auto& m = cell.result->final_metrics;
        row.push_back(format_real(m.proxy_fid));
        row.push_back(std::to_string(m.modes_hit));
        row.push_back(format_real(m.hq_fraction));
        row.push_back(cell.result->last ? format_real(cell.result->last->l_d) : "");
        row.push_back(cell.result->last ? format_real(cell.result->last->l_g) : "");
      } else {
        row.insert(row.end(), {"", "", "", "", ""});
      }
      csv += csv_line(row);
    }
    write_text((out / "results.csv").string(), csv);
    log << cells.size() << " cells -> " << (out / "results.csv").string() << "\n";
    return kOk;
  });
}

int cmd_check(const GlobalOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    kernels::set_num_threads(opts.threads);
    const auto results = run_checks();
    bool ok = true;
    for (const auto& r : results) {
      char line[256];
      std::snprintf(line, sizeof line, "%-4s %-34s max_err=%-12.4g tol=%-10.3g %s\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.max_error, r.tolerance, r.detail.c_str());
      log << line;
      ok = ok && r.pass;
    }
    log << results.size() << " checks, " << (ok ? "all passed" : "FAILURES") << "\n";
    return ok ? kOk : kCheckFailed;
  });
}

int cmd_game(const GlobalOptions& opts, const GameOptions& g, std::ostream& log) {
  return guarded(log, [&] {
    Game game;
    auto init = [&g](std::size_t i) { return i < g.init.size() ? g.init[i] : 1.0; };
    if (g.game == "bilinear") {
      game = bilinear_game(init(0), init(1));
    } else if (g.game == "potential") {
      game = potential_game(init(0), init(1));
    } else if (g.game == "logan-toy") {
      // Players dz, d, g at (dz, d, g) = init; z = 1, eta = 0.5.
      game = logan_toy_game(1.0, init(1), init(2), init(0), 0.5);
    } else if (g.game == "quadratic") {
      if (g.spec.empty()) throw ConfigError("quadratic game needs --spec FILE");
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read_text(g.spec));
        const auto dims = j.at("dims").get<std::vector<std::size_t>>();
        std::size_t total = 0;
        for (auto d : dims) total += d;
        std::vector<Tensor> q, b;
        for (const auto& m : j.at("q")) q.emplace_back(Shape{total, total}, m.get<std::vector<double>>());
        for (const auto& v : j.at("b")) b.emplace_back(Shape{1, total}, v.get<std::vector<double>>());
        game = quadratic_game(dims, q, b, j.at("theta0").get<std::vector<double>>());
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad quadratic spec: ") + e.what());
      } catch (const ShapeError& e) {
        throw ConfigError(std::string("bad quadratic spec: ") + e.what());
      }
    } else {
      throw ConfigError("unknown game '" + g.game + "' (expected bilinear, potential, quadratic or logan-toy)");
    }
    DynamicsConfig dc;
    try {
      dc.method = parse_dynamics(g.method);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    dc.steps = g.steps;
    dc.lr = g.lr;
    dc.lambda = g.lambda;
    dc.alpha = g.alpha;
    const Trajectory t = simulate_dynamics(game, dc);

    const fs::path out(resolve_out_dir(opts, "", g.game + "-" + g.method));
    fs::create_directories(out);
    std::vector<std::string> head{"step"};
    for (const auto& n : t.names) head.push_back(n);
    head.insert(head.end(), {"theta_norm", "norm_delta", "grad_norm"});
    std::string csv = csv_line(head);
    Curve phase{g.game + " / " + g.method, {}, {}};
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const auto& p = t.points[i];
      std::vector<std::string> row{std::to_string(p.step)};
      for (double v : p.theta) row.push_back(format_real(v));
      row.push_back(format_real(p.theta_norm));
      row.push_back(i ? format_real(p.theta_norm - t.points[i - 1].theta_norm) : "");
      row.push_back(format_real(p.grad_norm));
      csv += csv_line(row);
      phase.x.push_back(p.theta[0]);
      phase.y.push_back(p.theta.size() > 1 ? p.theta[1] : 0.0);
    }
    write_text((out / "trajectory.csv").string(), csv);
    write_text((out / "phase.svg").string(),
               curves_svg({phase}, "phase portrait", t.names[0], t.names.size() > 1 ? t.names[1] : "-"));
    const auto& last = t.points.back();
    log << g.game << " " << g.method << ": " << t.points.size() - 1 << " steps, |theta| "
        << format_real(t.points.front().theta_norm) << " -> " << format_real(last.theta_norm)
        << (t.diverged ? " (DIVERGED)" : "") << "\n";
    return kOk;
  });
}

int run(int argc, char** argv) {
  CLI::App app{"LOGAN desk laboratory: latent-optimised GAN training, analysis and evaluation"};
  app.require_subcommand(1);
  GlobalOptions opts;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "run configuration (JSON)");
    sub->add_option("--seed", seed, "override the master seed");
    sub->add_option("--out", opts.out, "output directory (default $LOGAN_LAB_OUT/<run id>)");
    sub->add_option("--threads", opts.threads, "kernel threads (default 1 for reproducibility)")
        ->check(CLI::PositiveNumber);
  };

  std::string resume, checkpoint;
  auto* train = app.add_subcommand("train", "train a GAN (LOGAN or vanilla) from a config");
  add_common(train);
  train->add_option("--resume", resume, "continue from a checkpoint");

  auto* eval = app.add_subcommand("eval", "truncation and evaluation-step sweeps for a checkpoint");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "checkpoint to evaluate")->required();

  auto* sweep = app.add_subcommand("sweep", "grid over alpha, beta, w_r, c from the config's sweep block");
  add_common(sweep);

  auto* check = app.add_subcommand("check", "run the oracle and property checks");
  add_common(check);

  GameOptions game;
  auto* game_cmd = app.add_subcommand("game", "simulate a differentiable game");
  add_common(game_cmd);
  game_cmd->add_option("--game", game.game, "bilinear, potential, quadratic or logan-toy");
  game_cmd->add_option("--spec", game.spec, "quadratic game coefficients (JSON: dims, q, b, theta0)");
  game_cmd->add_option("--method", game.method, "simgrad, sga, unrolled or logan");
  game_cmd->add_option("--steps", game.steps, "number of steps");
  game_cmd->add_option("--lr", game.lr, "learning rate");
  game_cmd->add_option("--lambda", game.lambda, "SGA coefficient");
  game_cmd->add_option("--alpha", game.alpha, "unrolled / latent step size");
  game_cmd->add_option("--init", game.init, "initial parameters")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigInvalid;
  }
  for (auto* sub : {train, eval, sweep, check, game_cmd}) {
    if (sub->parsed() && sub->count("--seed")) opts.seed = seed;
  }
  if (train->parsed()) return cmd_train(opts, resume, std::cout);
  if (eval->parsed()) return cmd_eval(opts, checkpoint, std::cout);
  if (sweep->parsed()) return cmd_sweep(opts, std::cout);
  if (check->parsed()) return cmd_check(opts, std::cout);
  return cmd_game(opts, game, std::cout);
}

}  // namespace logan::cli
