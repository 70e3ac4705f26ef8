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

#include "logan/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "logan/errors.hpp"

namespace logan {

namespace {

using nlohmann::json;

// Reads a JSON object, checking types and tracking which keys were used.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
        throw ConfigError("key '" + child(key) + "' must be non-negative");
      }
    }
    try {
      out = v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError("key '" + child(key) + "' has the wrong type");
    }
  }

  Reader object(const std::string& key) {
    seen_.insert(key);
    return Reader(obj_.contains(key) ? obj_.at(key) : empty(), child(key));
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  /// Rejects keys nobody asked for.
  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + child(key) + "'");
    }
  }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename T, typename Parse>
void get_enum(Reader& r, const std::string& key, T& out, Parse parse) {
  std::string s;
  if (!r.has(key)) return;
  r.get(key, s);
  try {
    out = parse(s);
  } catch (const Error& e) {
    throw ConfigError("key '" + r.child(key) + "': " + e.what());
  }
}

}  // namespace

DataDistribution DataSpec::build() const {
  switch (kind) {
    case DataKind::kRing: return DataDistribution::ring(modes, radius, stddev);
    case DataKind::kGrid: return DataDistribution::grid(side, spacing, stddev);
    case DataKind::kTable: return DataDistribution::table(centers, stddev);
  }
  throw ConfigError("unknown data kind");
}

void RunConfig::validate() const {
  if (run_id.empty()) throw ConfigError("run_id must not be empty");
  train.validate();
  for (double s : eval_plan.truncation) {
    if (!(s > 0.0 && s <= 1.0)) throw ConfigError("eval.truncation values must lie in (0, 1]");
  }
  for (int k : eval_plan.steps) {
    if (k < 0) throw ConfigError("eval.steps values must be non-negative");
  }
  if (sweep.replicates < 1) throw ConfigError("sweep.replicates must be at least 1");
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  Reader top(root, "");
  if (!top.has("seed")) throw ConfigError("missing required key 'seed'");

  RunConfig c;
  TrainConfig& t = c.train;
  top.get("seed", t.seed);
  top.get("run_id", c.run_id);
  top.get("output_dir", c.output_dir);
  if (top.has("profile")) {
    std::string p;
    top.get("profile", p);
    if (p == "small") {
      t.latent = LatentOptConfig::small_profile();
    } else if (p == "large") {
      t.latent = LatentOptConfig::large_profile();
    } else {
      throw ConfigError("key 'profile': expected small or large, got '" + p + "'");
    }
  }

  Reader tr = top.object("train");
  tr.get("batch", t.batch);
  tr.get("steps", t.steps);
  get_enum(tr, "optimiser", t.optimiser, parse_optimiser);
  tr.get("lr_d", t.lr_d);
  tr.get("lr_g", t.lr_g);
  get_enum(tr, "loss", t.loss, parse_loss);
  tr.get("latent_enabled", t.latent_enabled);
  tr.get("alternating", t.alternating);
  tr.get("latent_dim", t.latent_dim);
  tr.get("g_hidden", t.g_hidden);
  tr.get("d_hidden", t.d_hidden);
  tr.get("slope", t.slope);
  tr.get("metrics_interval", t.metrics_interval);
  tr.get("eval_interval", t.eval_interval);
  tr.get("checkpoint_interval", t.checkpoint_interval);
  Reader ab = tr.object("ablation");
  ab.get("block_d_term", t.ablation.block_d_term);
  ab.get("block_g_term", t.ablation.block_g_term);
  ab.finish();
  tr.finish();

  Reader la = top.object("latent");
  get_enum(la, "method", t.latent.method, parse_method);
  la.get("alpha", t.latent.alpha);
  la.get("beta", t.latent.beta);
  la.get("w_r", t.latent.w_r);
  la.get("c", t.latent.c);
  la.get("steps", t.latent.steps);
  la.get("eval_steps", t.latent.eval_steps);
  la.get("clip", t.latent.clip);
  la.finish();

  Reader da = top.object("data");
  get_enum(da, "kind", c.data.kind, parse_data_kind);
  da.get("modes", c.data.modes);
  da.get("radius", c.data.radius);
  da.get("side", c.data.side);
  da.get("spacing", c.data.spacing);
  da.get("std", c.data.stddev);
  da.get("centers", c.data.centers);
  da.finish();

  Reader ev = top.object("eval");
  ev.get("samples", t.eval.samples);
  ev.get("reference_samples", t.eval.reference_samples);
  ev.get("radius", t.eval.radius);
  ev.get("seed", t.eval.seed);
  ev.get("truncation", c.eval_plan.truncation);
  ev.get("steps", c.eval_plan.steps);
  ev.finish();

  Reader sw = top.object("sweep");
  sw.get("alpha", c.sweep.alpha);
  sw.get("beta", c.sweep.beta);
  sw.get("w_r", c.sweep.w_r);
  sw.get("c", c.sweep.c);
  sw.get("replicates", c.sweep.replicates);
  sw.finish();
  top.finish();

  t.data = c.data.build();
  t.eval.latent = t.latent;
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const RunConfig& c) {
  const TrainConfig& t = c.train;
  json j;
  j["seed"] = t.seed;
  j["run_id"] = c.run_id;
  j["output_dir"] = c.output_dir;
  j["train"] = {
      {"batch", t.batch},
      {"steps", t.steps},
      {"optimiser", optimiser_name(t.optimiser)},
      {"lr_d", t.lr_d},
      {"lr_g", t.lr_g},
      {"loss", loss_name(t.loss)},
      {"latent_enabled", t.latent_enabled},
      {"alternating", t.alternating},
      {"latent_dim", t.latent_dim},
      {"g_hidden", t.g_hidden},
      {"d_hidden", t.d_hidden},
      {"slope", t.slope},
      {"metrics_interval", t.metrics_interval},
      {"eval_interval", t.eval_interval},
      {"checkpoint_interval", t.checkpoint_interval},
      {"ablation", {{"block_d_term", t.ablation.block_d_term}, {"block_g_term", t.ablation.block_g_term}}},
  };
  j["latent"] = {
      {"method", method_name(t.latent.method)},
      {"alpha", t.latent.alpha},
      {"beta", t.latent.beta},
      {"w_r", t.latent.w_r},
      {"c", t.latent.c},
      {"steps", t.latent.steps},
      {"eval_steps", t.latent.eval_steps},
      {"clip", t.latent.clip},
  };
  j["data"] = {
      {"kind", data_kind_name(c.data.kind)},
      {"modes", c.data.modes},
      {"radius", c.data.radius},
      {"side", c.data.side},
      {"spacing", c.data.spacing},
      {"std", c.data.stddev},
      {"centers", c.data.centers},
  };
  j["eval"] = {
      {"samples", t.eval.samples},
      {"reference_samples", t.eval.reference_samples},
      {"radius", t.eval.radius},
      {"seed", t.eval.seed},
      {"truncation", c.eval_plan.truncation},
      {"steps", c.eval_plan.steps},
  };
  j["sweep"] = {
      {"alpha", c.sweep.alpha},
      {"beta", c.sweep.beta},
      {"w_r", c.sweep.w_r},
      {"c", c.sweep.c},
      {"replicates", c.sweep.replicates},
  };
  return j.dump(2) + "\n";
}

}  // namespace logan
