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

// Subcommands of the logan_lab command-line tool. Each returns a process
// exit status and writes its artifacts under the resolved output directory.

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "logan/config.hpp"
#include "logan/metrics.hpp"
#include "logan/trainer.hpp"

namespace logan::cli {

enum ExitCode : int {
  kOk = 0,
  kError = 1,
  kConfigInvalid = 2,
  kNonFinite = 3,
  kCheckFailed = 4,
};

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
};

/// --out, else the config's output_dir, else $LOGAN_LAB_OUT/<leaf> (or
/// runs/<leaf> when the variable is unset).
std::string resolve_out_dir(const GlobalOptions& opts, const std::string& config_dir,
                            const std::string& leaf);

/// Config from --config (defaults plus --seed when absent) with --seed applied.
RunConfig effective_config(const GlobalOptions& opts, bool config_required);

struct RunSummary {
  std::uint64_t steps = 0;
  std::optional<MetricsRecord> last;
  SampleMetrics final_metrics;
};

/// Trains `config` into `out_dir`: config.json, metrics.csv, checkpoints/,
/// final.logn and samples.svg. With `resume` the run continues from that
/// state and metrics.csv keeps its rows up to the resumed step.
RunSummary run_training(const RunConfig& config, const std::string& out_dir,
                        std::optional<TrainState> resume);

int cmd_train(const GlobalOptions& opts, const std::string& resume, std::ostream& log);
int cmd_eval(const GlobalOptions& opts, const std::string& checkpoint, std::ostream& log);
int cmd_sweep(const GlobalOptions& opts, std::ostream& log);

struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

std::vector<CheckResult> run_checks();
int cmd_check(const GlobalOptions& opts, std::ostream& log);

struct GameOptions {
  std::string game = "bilinear";
  std::string spec;
  std::string method = "simgrad";
  int steps = 100;
  double lr = 0.1;
  double lambda = 1.0;
  double alpha = 0.1;
  std::vector<double> init{1.0, 1.0};
};

int cmd_game(const GlobalOptions& opts, const GameOptions& game, std::ostream& log);

/// Parses argv and dispatches; the body of main().
int run(int argc, char** argv);

}  // namespace logan::cli
