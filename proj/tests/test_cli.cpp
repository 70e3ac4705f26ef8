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

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "commands.hpp"
#include "logan/checkpoint.hpp"
#include "logan/config.hpp"
#include "logan/errors.hpp"
#include "logan/game.hpp"
#include "logan/report.hpp"

namespace logan {
namespace {

namespace fs = std::filesystem;

constexpr const char* kTinyConfig = R"({
  "seed": 3,
  "run_id": "tiny",
  "profile": "small",
  "train": {"batch": 8, "steps": 12, "optimiser": "adam", "lr_d": 0.002, "lr_g": 0.002,
            "latent_dim": 4, "g_hidden": [6], "d_hidden": [6], "eval_interval": 6,
            "checkpoint_interval": 5},
  "eval": {"samples": 100, "reference_samples": 400, "truncation": [1.0],
           "steps": [0, 1, 5, 10, 20, 30]}
})";

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("logan_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& leaf) const { return (path_ / leaf).string(); }

 private:
  fs::path path_;
};

cli::GlobalOptions options(const std::string& config, const std::string& out) {
  cli::GlobalOptions o;
  o.config = config;
  o.out = out;
  return o;
}

// Structural XML check: balanced tags, one root element named svg.
bool well_formed_svg(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t pos = 0;
  int roots = 0;
  bool root_is_svg = false;
  while ((pos = s.find('<', pos)) != std::string::npos) {
    const auto end = s.find('>', pos);
    if (end == std::string::npos) return false;
    std::string tag = s.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      continue;
    }
    const bool self_closing = tag.back() == '/';
    const std::string name = tag.substr(0, tag.find_first_of(" /"));
    if (stack.empty()) {
      ++roots;
      root_is_svg = name == "svg";
    }
    if (!self_closing) stack.push_back(name);
  }
  return stack.empty() && roots == 1 && root_is_svg;
}

TEST(Config, MissingSeedIsNamed) {
  try {
    parse_config(R"({"run_id": "x"})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'seed'"), std::string::npos);
  }
}

TEST(Config, UnknownKeysAndBadValuesRejected) {
  EXPECT_THROW(parse_config(R"({"seed": 1, "extra": 2})"), ConfigError);
  try {
    parse_config(R"({"seed": 1, "train": {"ablation": {"block_x": true}}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train.ablation.block_x"), std::string::npos);
  }
  EXPECT_THROW(parse_config(R"({"seed": 1, "train": {"batch": "many"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"seed": 1, "train": {"batch": -4}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"seed": 1, "train": {"lr_d": 0}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"seed": 1, "latent": {"method": "adam"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"seed": 1, "profile": "medium"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"seed": 1, "eval": {"truncation": [0.0]}})"), ConfigError);
  EXPECT_THROW(parse_config("{\"seed\": 1,"), ConfigError);
}

TEST(Config, ProfilesCarryTheGridSearchValues) {
  const auto small = parse_config(R"({"seed": 1, "profile": "small"})").train.latent;
  EXPECT_EQ(small.alpha, 0.9);
  EXPECT_EQ(small.beta, 0.1);
  EXPECT_EQ(small.w_r, 0.1);
  EXPECT_EQ(small.c, 0.8);
  const auto large = parse_config(R"({"seed": 1, "profile": "large", "latent": {"c": 0.7}})").train.latent;
  EXPECT_EQ(large.beta, 5.0);
  EXPECT_EQ(large.w_r, 300.0);
  EXPECT_EQ(large.c, 0.7);
}

TEST(Config, CanonicalRoundTrip) {
  for (const char* text : {kTinyConfig, R"({"seed": 9, "data": {"kind": "table", "centers": [[0, 1], [2, 3]], "std": 0.1}})",
                           R"({"seed": 2, "data": {"kind": "grid"}, "sweep": {"beta": [0.1, 5.0], "replicates": 2}})"}) {
    const std::string canonical = to_json(parse_config(text));
    EXPECT_EQ(to_json(parse_config(canonical)), canonical);
  }
}

TEST(Checkpoint, RoundTripIsBitExact) {
  auto c = parse_config(kTinyConfig).train;
  TrainState s = initial_state(c);
  const Trainer t(c);
  for (int i = 0; i < 3; ++i) t.step(s);
  const std::string bytes = encode_checkpoint(s);
  EXPECT_EQ(bytes.substr(0, 4), "LOGN");
  const TrainState back = decode_checkpoint(bytes);
  EXPECT_EQ(back.model.theta_d(), s.model.theta_d());
  EXPECT_EQ(back.model.theta_g(), s.model.theta_g());
  EXPECT_EQ(back.optimiser.v_d, s.optimiser.v_d);
  EXPECT_EQ(back.optimiser.t, s.optimiser.t);
  EXPECT_EQ(back.step, 3u);
  EXPECT_EQ(back.rng.state(), s.rng.state());
  EXPECT_EQ(encode_checkpoint(back), bytes);
}

TEST(Checkpoint, RejectsBadInput) {
  const TrainState s = initial_state(parse_config(kTinyConfig).train);
  std::string bytes = encode_checkpoint(s);
  std::string wrong_version = bytes;
  wrong_version[4] = 7;
  try {
    decode_checkpoint(wrong_version);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("version 7"), std::string::npos);
  }
  EXPECT_THROW(decode_checkpoint("LOGX" + bytes.substr(4)), CheckpointError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() / 2)), CheckpointError);
  EXPECT_THROW(decode_checkpoint(bytes + "x"), CheckpointError);
  EXPECT_THROW(decode_checkpoint(""), CheckpointError);
}

TEST(Csv, MetricsRoundTripExactly) {
  MetricsRecord r;
  r.step = 7;
  r.l_d = 0.1;
  r.l_g = -1.0 / 3.0;
  r.r_z = 1e-300;
  r.dz_norm = 12345.678;
  r.df_abs = 0.0;
  r.dtheta_d = 2.5;
  r.dtheta_g = 3.0;
  r.dtheta_diff = -0.5;
  r.curvature_mean = 9.75;
  r.mode_coverage = 6;
  const std::string text = std::string(kMetricsHeader) + "\n" + metrics_row(r);
  const auto back = read_metrics(text);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r);
}

TEST(Csv, StrictReaderRejectsLooseFormatting) {
  const std::string h = "a,b";
  EXPECT_NO_THROW(read_numeric_csv("a,b\n1.5,\n", h));
  EXPECT_THROW(read_numeric_csv("a,b\r\n1,2\r\n", h), Error);
  EXPECT_THROW(read_numeric_csv("a,b\n1,2", h), Error);
  EXPECT_THROW(read_numeric_csv("a,b\n\"1,5\",2\n", h), Error);
  EXPECT_THROW(read_numeric_csv("a,b\n1;5,2\n", h), Error);
  EXPECT_THROW(read_numeric_csv("a,b\nnan,2\n", h), Error);
  EXPECT_THROW(read_numeric_csv("a,b\n1\n", h), Error);
  EXPECT_THROW(read_numeric_csv("x,y\n1,2\n", h), Error);
  EXPECT_THROW(format_real(std::numeric_limits<double>::infinity()), Error);
}

TEST(Svg, OutputsAreWellFormed) {
  const auto ring = DataDistribution::ring();
  Rng rng(1);
  EXPECT_TRUE(well_formed_svg(scatter_svg(ring.sample(rng, 50), ring.centers, "ring <&> \"samples\"")));
  EXPECT_TRUE(well_formed_svg(curves_svg({{"a", {0, 1, 2}, {1, 0, 1}}, {"b", {0, 1}, {5, 5}}}, "t", "x", "y")));
  EXPECT_TRUE(well_formed_svg(curves_svg({}, "empty", "x", "y")));
  EXPECT_FALSE(well_formed_svg("<svg><g></svg>"));
}

class CliRun : public ::testing::Test {
 protected:
  void SetUp() override { write_text(dir / "config.json", kTinyConfig); }
  TempDir dir;
  std::ostringstream log;
};

TEST_F(CliRun, TrainIsByteDeterministic) {
  ASSERT_EQ(cli::cmd_train(options(dir / "config.json", dir / "a"), "", log), cli::kOk) << log.str();
  ASSERT_EQ(cli::cmd_train(options(dir / "config.json", dir / "b"), "", log), cli::kOk) << log.str();
  const std::string a = read_text(dir / "a/metrics.csv");
  EXPECT_EQ(a, read_text(dir / "b/metrics.csv"));
  EXPECT_EQ(read_text(dir / "a/final.logn"), read_text(dir / "b/final.logn"));
  const auto recs = read_metrics(a);
  ASSERT_EQ(recs.size(), 12u);
  EXPECT_TRUE(recs[5].proxy_fid.has_value());
  EXPECT_TRUE(well_formed_svg(read_text(dir / "a/samples.svg")));
  for (const char* f : {"step_00000000.logn", "step_00000005.logn", "step_00000010.logn", "step_00000012.logn"}) {
    EXPECT_TRUE(fs::exists(dir / (std::string("a/checkpoints/") + f))) << f;
  }
}

TEST_F(CliRun, ZeroStepsWritesInitialCheckpointAndEmptyBody) {
  write_text(dir / "zero.json", R"({"seed": 1, "train": {"steps": 0, "latent_dim": 4, "g_hidden": [4], "d_hidden": [4]},
                                     "eval": {"samples": 50, "reference_samples": 100}})");
  ASSERT_EQ(cli::cmd_train(options(dir / "zero.json", dir / "z"), "", log), cli::kOk) << log.str();
  EXPECT_EQ(read_text(dir / "z/metrics.csv"), std::string(kMetricsHeader) + "\n");
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir / "z/checkpoints")) {
    EXPECT_EQ(e.path().filename(), "step_00000000.logn");
    ++n;
  }
  EXPECT_EQ(n, 1u);
}

TEST_F(CliRun, ResumeMatchesUninterruptedRun) {
  ASSERT_EQ(cli::cmd_train(options(dir / "config.json", dir / "full"), "", log), cli::kOk) << log.str();
  fs::copy(dir / "full", dir / "part", fs::copy_options::recursive);
  // Resume from step 5 in a copy; rows after step 5 are regenerated.
  ASSERT_EQ(cli::cmd_train(options(dir / "config.json", dir / "part"), dir / "full/checkpoints/step_00000005.logn", log),
            cli::kOk)
      << log.str();
  EXPECT_EQ(read_text(dir / "part/metrics.csv"), read_text(dir / "full/metrics.csv"));
  EXPECT_EQ(read_text(dir / "part/final.logn"), read_text(dir / "full/final.logn"));
}

TEST_F(CliRun, SchemaAndNonFiniteExitCodes) {
  write_text(dir / "noseed.json", R"({"run_id": "x"})");
  EXPECT_EQ(cli::cmd_train(options(dir / "noseed.json", dir / "n"), "", log), cli::kConfigInvalid);
  EXPECT_NE(log.str().find("'seed'"), std::string::npos);
  EXPECT_EQ(cli::cmd_train(options("", dir / "n"), "", log), cli::kConfigInvalid);

  write_text(dir / "blowup.json", R"({"seed": 1, "train": {"steps": 50, "optimiser": "sgd", "lr_d": 1e300, "lr_g": 1e300,
                                        "loss": "wasserstein", "latent_dim": 4, "g_hidden": [4], "d_hidden": [4]}})");
  EXPECT_EQ(cli::cmd_train(options(dir / "blowup.json", dir / "bad"), "", log), cli::kNonFinite);
  EXPECT_TRUE(fs::exists(dir / "bad/abort.txt"));
}

TEST_F(CliRun, EvalSweepsMatchPlainSampling) {
  ASSERT_EQ(cli::cmd_train(options(dir / "config.json", dir / "t"), "", log), cli::kOk);
  ASSERT_EQ(cli::cmd_eval(options(dir / "config.json", dir / "e"), dir / "t/final.logn", log), cli::kOk) << log.str();
  const auto trunc = read_numeric_csv(read_text(dir / "e/truncation.csv"), "s,proxy_fid,mode_coverage,hq_fraction");
  const auto steps = read_numeric_csv(read_text(dir / "e/eval_steps.csv"),
                                      "steps,proxy_fid,mode_coverage,hq_fraction,mean_critic_gain,ascent_violations");
  ASSERT_EQ(trunc.size(), 1u);
  ASSERT_EQ(steps.size(), 6u);
  EXPECT_EQ(*trunc[0][1], *steps[0][1]);
  // Plain evaluation printed by the command matches both single points.
  EXPECT_NE(log.str().find("plain proxy_fid=" + format_real(*trunc[0][1])), std::string::npos);
  EXPECT_TRUE(well_formed_svg(read_text(dir / "e/truncation.svg")));
  EXPECT_TRUE(well_formed_svg(read_text(dir / "e/eval_steps.svg")));

  EXPECT_EQ(cli::cmd_eval(options(dir / "config.json", dir / "e2"), "", log), cli::kConfigInvalid);
  write_text(dir / "junk.logn", "LOGN");
  EXPECT_EQ(cli::cmd_eval(options(dir / "config.json", dir / "e3"), dir / "junk.logn", log), cli::kError);
}

TEST_F(CliRun, SweepGridAndCellSeeds) {
  write_text(dir / "grid.json", R"({"seed": 4, "train": {"batch": 4, "steps": 3, "latent_dim": 4, "g_hidden": [4], "d_hidden": [4]},
                                     "eval": {"samples": 50, "reference_samples": 100},
                                     "sweep": {"alpha": [0.9], "beta": [0.1, 5.0]}})");
  auto o = options(dir / "grid.json", dir / "sw");
  o.threads = 2;
  ASSERT_EQ(cli::cmd_sweep(o, log), cli::kOk) << log.str();
  const std::string results = read_text(dir / "sw/results.csv");
  EXPECT_EQ(std::count(results.begin(), results.end(), '\n'), 3);

  // A one-point grid is a train run with the derived cell seed.
  write_text(dir / "one.json", R"({"seed": 4, "train": {"batch": 4, "steps": 3, "latent_dim": 4, "g_hidden": [4], "d_hidden": [4]},
                                    "eval": {"samples": 50, "reference_samples": 100}})");
  ASSERT_EQ(cli::cmd_sweep(options(dir / "one.json", dir / "one"), log), cli::kOk);
  auto t = options(dir / "one.json", dir / "direct");
  t.seed = derive_seed(4, 0);
  ASSERT_EQ(cli::cmd_train(t, "", log), cli::kOk);
  EXPECT_EQ(read_text(dir / "one/cell_0000/metrics.csv"), read_text(dir / "direct/metrics.csv"));
  EXPECT_EQ(read_text(dir / "one/cell_0000/final.logn"), read_text(dir / "direct/final.logn"));
}

TEST_F(CliRun, GameTrajectories) {
  auto norm_deltas = [&](const std::string& method, const std::string& game) {
    cli::GameOptions g;
    g.game = game;
    g.method = method;
    EXPECT_EQ(cli::cmd_game(options("", dir / (game + method)), g, log), cli::kOk) << log.str();
    const auto rows = read_numeric_csv(read_text(dir / (game + method + "/trajectory.csv")),
                                       "step,x,y,theta_norm,norm_delta,grad_norm");
    EXPECT_EQ(rows.size(), 101u);
    EXPECT_TRUE(well_formed_svg(read_text(dir / (game + method + "/phase.svg"))));
    std::vector<double> d;
    for (std::size_t i = 1; i < rows.size(); ++i) d.push_back(*rows[i][4]);
    return d;
  };
  for (double d : norm_deltas("simgrad", "bilinear")) EXPECT_GT(d, 0.0);
  for (double d : norm_deltas("sga", "bilinear")) EXPECT_LT(d, 0.0);
  for (const char* m : {"simgrad", "sga", "unrolled"}) {
    for (double d : norm_deltas(m, "potential")) EXPECT_LT(d, 0.0) << m;
  }
  cli::GameOptions bad;
  bad.game = "chess";
  EXPECT_EQ(cli::cmd_game(options("", dir / "x"), bad, log), cli::kConfigInvalid);
}

TEST_F(CliRun, QuadraticGameFromSpec) {
  write_text(dir / "q.json", R"({"dims": [1, 1], "q": [[0, 1, 1, 0], [0, -1, -1, 0]], "b": [[0, 0], [0, 0]], "theta0": [1, 1]})");
  cli::GameOptions g;
  g.game = "quadratic";
  g.spec = dir / "q.json";
  g.steps = 10;
  ASSERT_EQ(cli::cmd_game(options("", dir / "q"), g, log), cli::kOk) << log.str();
  EXPECT_TRUE(fs::exists(dir / "q/trajectory.csv"));
  g.spec = dir / "missing.json";
  EXPECT_EQ(cli::cmd_game(options("", dir / "q2"), g, log), cli::kError);
}

TEST(CliCheck, AllChecksPass) {
  const auto results = cli::run_checks();
  EXPECT_GE(results.size(), 12u);
  for (const auto& r : results) EXPECT_TRUE(r.pass) << r.name << ": " << r.max_error << " " << r.detail;
  std::ostringstream log;
  EXPECT_EQ(cli::cmd_check({}, log), cli::kOk);
}

TEST(CliOptions, OutputDirectoryResolution) {
  cli::GlobalOptions o;
  o.out = "explicit";
  EXPECT_EQ(cli::resolve_out_dir(o, "cfg", "leaf"), "explicit");
  o.out.clear();
  EXPECT_EQ(cli::resolve_out_dir(o, "cfg", "leaf"), "cfg");
  ::setenv("LOGAN_LAB_OUT", "/tmp/root", 1);
  EXPECT_EQ(cli::resolve_out_dir(o, "", "leaf"), "/tmp/root/leaf");
  ::unsetenv("LOGAN_LAB_OUT");
  EXPECT_EQ(cli::resolve_out_dir(o, "", "leaf"), "runs/leaf");
}

TEST(CliOptions, ArgumentParsing) {
  const char* bad_threads[] = {"logan_lab", "check", "--threads", "0"};
  EXPECT_EQ(cli::run(4, const_cast<char**>(bad_threads)), cli::kConfigInvalid);
  const char* no_sub[] = {"logan_lab"};
  EXPECT_EQ(cli::run(1, const_cast<char**>(no_sub)), cli::kConfigInvalid);
}

}  // namespace
}  // namespace logan
