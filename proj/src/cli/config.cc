// Copyright 2026 The GRWM Authors
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

#include "grwm/cli/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "grwm/common/errors.h"

namespace grwm::cli {
namespace {

struct Entry {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

[[noreturn]] void Bad(const std::string& key, const std::string& value,
                      const std::string& why) {
  throw FormatError(FormatErrorKind::kMalformed,
                    "config key " + key + " = '" + value + "': " + why);
}

std::string Trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    Bad(key, text, "not a valid number");
  }
  return v;
}

template <typename T>
std::string FormatNumber(T v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

using Registry = std::map<std::string, Entry>;

template <typename T, typename F>
void Number(Registry& r, const std::string& key, F field) {
  r[key] = Entry{
      [field](const RunConfig& c) {
        return FormatNumber(field(const_cast<RunConfig&>(c)));
      },
      [field, key](RunConfig& c, const std::string& v) {
        field(c) = ParseNumber<T>(key, v);
      }};
}

template <typename F>
void Text(Registry& r, const std::string& key, F field) {
  r[key] = Entry{[field](const RunConfig& c) {
                   return field(const_cast<RunConfig&>(c));
                 },
                 [field](RunConfig& c, const std::string& v) { field(c) = v; }};
}

void Bool(Registry& r, const std::string& key,
          std::function<bool&(RunConfig&)> field) {
  r[key] = Entry{[field](const RunConfig& c) {
                   return std::string(field(const_cast<RunConfig&>(c))
                                          ? "true"
                                          : "false");
                 },
                 [field, key](RunConfig& c, const std::string& v) {
                   if (v == "true") {
                     field(c) = true;
                   } else if (v == "false") {
                     field(c) = false;
                   } else {
                     Bad(key, v, "expected true or false");
                   }
                 }};
}

// Enum stored as one of a fixed set of names.
template <typename E>
void Choice(Registry& r, const std::string& key,
            std::function<E&(RunConfig&)> field,
            std::vector<std::pair<std::string, E>> names) {
  r[key] = Entry{[field, names](const RunConfig& c) {
                   const E v = field(const_cast<RunConfig&>(c));
                   for (const auto& [n, e] : names) {
                     if (e == v) return n;
                   }
                   return std::string("?");
                 },
                 [field, names, key](RunConfig& c, const std::string& v) {
                   for (const auto& [n, e] : names) {
                     if (n == v) {
                       field(c) = e;
                       return;
                     }
                   }
                   std::string all;
                   for (const auto& [n, e] : names) all += " " + n;
                   Bad(key, v, "expected one of" + all);
                 }};
}

double Degrees(double rad) { return rad * 180.0 / std::numbers::pi; }
double Radians(double deg) { return deg * std::numbers::pi / 180.0; }

Registry Build() {
  Registry r;
  // env
  Number<double>(r, "env.step_size", [](RunConfig& c) -> double& { return c.env.step_size; });
  r["env.turn_degrees"] = Entry{
      [](const RunConfig& c) { return FormatNumber(Degrees(c.env.turn_increment)); },
      [](RunConfig& c, const std::string& v) {
        c.env.turn_increment = Radians(ParseNumber<double>("env.turn_degrees", v));
      }};
  r["env.fov_degrees"] = Entry{
      [](const RunConfig& c) { return FormatNumber(Degrees(c.env.fov)); },
      [](RunConfig& c, const std::string& v) {
        c.env.fov = Radians(ParseNumber<double>("env.fov_degrees", v));
      }};
  Number<int>(r, "env.frame_height", [](RunConfig& c) -> int& { return c.env.frame_height; });
  Number<int>(r, "env.frame_width", [](RunConfig& c) -> int& { return c.env.frame_width; });
  Number<double>(r, "env.margin", [](RunConfig& c) -> double& { return c.env.margin; });
  r["env.palette_size"] = Entry{
      [](const RunConfig& c) { return FormatNumber(int(c.env.palette.size())); },
      [](RunConfig& c, const std::string& v) {
        const int n = ParseNumber<int>("env.palette_size", v);
        const auto full = mazeworld::EnvConfig::DefaultPalette();
        if (n < 1 || n > static_cast<int>(full.size())) {
          Bad("env.palette_size", v, "must be 1.." + std::to_string(full.size()));
        }
        c.env.palette.assign(full.begin(), full.begin() + n);
      }};

  // data
  Number<uint64_t>(r, "data.maze_seed", [](RunConfig& c) -> uint64_t& { return c.data.maze.seed; });
  Number<int>(r, "data.maze_width", [](RunConfig& c) -> int& { return c.data.maze.width; });
  Number<int>(r, "data.maze_height", [](RunConfig& c) -> int& { return c.data.maze.height; });
  Number<double>(r, "data.braid", [](RunConfig& c) -> double& { return c.data.maze.braid; });
  Number<int>(r, "data.count", [](RunConfig& c) -> int& { return c.data.collect.count; });
  Number<int>(r, "data.length", [](RunConfig& c) -> int& { return c.data.collect.length; });
  Number<double>(r, "data.epsilon", [](RunConfig& c) -> double& { return c.data.collect.epsilon; });
  Number<uint64_t>(r, "data.seed", [](RunConfig& c) -> uint64_t& { return c.data.collect.seed; });
  Number<int>(r, "data.workers", [](RunConfig& c) -> int& { return c.data.collect.workers; });
  Number<double>(r, "data.val_fraction", [](RunConfig& c) -> double& { return c.data.val_fraction; });
  Number<uint64_t>(r, "data.split_seed", [](RunConfig& c) -> uint64_t& { return c.data.split_seed; });

  // repmodel (frame dims follow env)
  r["repmodel.conv_channels"] = Entry{
      [](const RunConfig& c) {
        std::string s;
        for (size_t i = 0; i < c.rep.conv_channels.size(); ++i) {
          if (i) s += ",";
          s += std::to_string(c.rep.conv_channels[i]);
        }
        return s;
      },
      [](RunConfig& c, const std::string& v) {
        std::vector<int> ch;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
          ch.push_back(ParseNumber<int>("repmodel.conv_channels", Trim(item)));
        }
        if (ch.empty()) Bad("repmodel.conv_channels", v, "empty list");
        c.rep.conv_channels = ch;
      }};
  Number<int>(r, "repmodel.feature_width", [](RunConfig& c) -> int& { return c.rep.feature_width; });
  Number<int>(r, "repmodel.agg_blocks", [](RunConfig& c) -> int& { return c.rep.agg_blocks; });
  Number<int>(r, "repmodel.heads", [](RunConfig& c) -> int& { return c.rep.heads; });
  Number<int>(r, "repmodel.window", [](RunConfig& c) -> int& { return c.rep.window; });
  Number<int>(r, "repmodel.latent_dim", [](RunConfig& c) -> int& { return c.rep.latent_dim; });
  Number<int>(r, "repmodel.proj_dim", [](RunConfig& c) -> int& { return c.rep.proj_dim; });
  Number<int>(r, "repmodel.decoder_hidden", [](RunConfig& c) -> int& { return c.rep.decoder_hidden; });
  Choice<geomloss::ProjectionMode>(
      r, "repmodel.projection",
      [](RunConfig& c) -> geomloss::ProjectionMode& { return c.rep.projection; },
      {{"with_head", geomloss::ProjectionMode::kWithHead},
       {"without_head", geomloss::ProjectionMode::kWithoutHead}});
  Number<double>(r, "repmodel.logvar_min", [](RunConfig& c) -> double& { return c.rep.logvar_min; });
  Number<double>(r, "repmodel.logvar_max", [](RunConfig& c) -> double& { return c.rep.logvar_max; });
  Number<int>(r, "repmodel.steps", [](RunConfig& c) -> int& { return c.ae.steps; });
  Number<int>(r, "repmodel.batch", [](RunConfig& c) -> int& { return c.ae.batch; });
  Number<int>(r, "repmodel.segment", [](RunConfig& c) -> int& { return c.ae.segment; });
  Number<double>(r, "repmodel.lr", [](RunConfig& c) -> double& { return c.ae.lr; });
  Number<int>(r, "repmodel.warmup", [](RunConfig& c) -> int& { return c.ae.warmup; });
  Number<double>(r, "repmodel.min_lr_ratio", [](RunConfig& c) -> double& { return c.ae.min_ratio; });
  Number<double>(r, "repmodel.weight_decay", [](RunConfig& c) -> double& { return c.ae.weight_decay; });

  // loss (projection mode follows repmodel.projection)
  Number<double>(r, "loss.beta", [](RunConfig& c) -> double& { return c.loss.beta; });
  Number<double>(r, "loss.lambda_slow", [](RunConfig& c) -> double& { return c.loss.lambda_slow; });
  Number<double>(r, "loss.lambda_uniform", [](RunConfig& c) -> double& { return c.loss.lambda_uniform; });
  Choice<geomloss::SlowMode>(
      r, "loss.slow_mode",
      [](RunConfig& c) -> geomloss::SlowMode& { return c.loss.slow_mode; },
      {{"all_pairs", geomloss::SlowMode::kAllPairs},
       {"adjacent", geomloss::SlowMode::kAdjacentOnly}});
  Choice<geomloss::ReconReduction>(
      r, "loss.recon",
      [](RunConfig& c) -> geomloss::ReconReduction& { return c.loss.recon; },
      {{"pixel_mean", geomloss::ReconReduction::kPixelMean},
       {"pixel_sum", geomloss::ReconReduction::kPixelSum}});

  // dynamics
  Choice<latdyn::Backend>(
      r, "dynamics.backend",
      [](RunConfig& c) -> latdyn::Backend& { return c.dyn.backend; },
      {{"regressor", latdyn::Backend::kRegressor},
       {"diffusion", latdyn::Backend::kDiffusion},
       {"oracle", latdyn::Backend::kOracle}});
  Number<int>(r, "dynamics.context", [](RunConfig& c) -> int& { return c.dyn.context; });
  Number<int>(r, "dynamics.width", [](RunConfig& c) -> int& { return c.dyn.width; });
  Number<int>(r, "dynamics.blocks", [](RunConfig& c) -> int& { return c.dyn.blocks; });
  Number<int>(r, "dynamics.diffusion_steps", [](RunConfig& c) -> int& { return c.dyn.diffusion_steps; });
  Number<double>(r, "dynamics.shift", [](RunConfig& c) -> double& { return c.dyn.shift; });
  Number<double>(r, "dynamics.noise_clip", [](RunConfig& c) -> double& { return c.dyn.noise_clip; });
  Number<double>(r, "dynamics.snr_gamma", [](RunConfig& c) -> double& { return c.dyn.snr_gamma; });
  Number<double>(r, "dynamics.snr_decay", [](RunConfig& c) -> double& { return c.dyn.weight_decay_ema; });
  Number<int>(r, "dynamics.sampler_steps", [](RunConfig& c) -> int& { return c.dyn.sampler_steps; });
  Number<double>(r, "dynamics.eta", [](RunConfig& c) -> double& { return c.dyn.eta; });
  Number<int>(r, "dynamics.time_embed", [](RunConfig& c) -> int& { return c.dyn.time_embed; });
  Number<int>(r, "dynamics.steps", [](RunConfig& c) -> int& { return c.dyn_train.steps; });
  Number<int>(r, "dynamics.batch", [](RunConfig& c) -> int& { return c.dyn_train.batch; });
  Number<double>(r, "dynamics.lr", [](RunConfig& c) -> double& { return c.dyn_train.lr; });
  Number<int>(r, "dynamics.warmup", [](RunConfig& c) -> int& { return c.dyn_train.warmup; });
  Number<double>(r, "dynamics.min_lr_ratio", [](RunConfig& c) -> double& { return c.dyn_train.min_ratio; });
  Number<double>(r, "dynamics.weight_decay", [](RunConfig& c) -> double& { return c.dyn_train.weight_decay; });

  // eval
  Number<int>(r, "eval.horizon", [](RunConfig& c) -> int& { return c.eval.horizon; });
  Number<int>(r, "eval.episodes", [](RunConfig& c) -> int& { return c.eval.episodes; });
  Number<int>(r, "eval.start", [](RunConfig& c) -> int& { return c.eval.start; });
  Choice<evalkit::Aggregation>(
      r, "eval.aggregation",
      [](RunConfig& c) -> evalkit::Aggregation& { return c.eval.aggregation; },
      {{"mean", evalkit::Aggregation::kMean},
       {"median", evalkit::Aggregation::kMedian}});
  Number<int>(r, "eval.clusters", [](RunConfig& c) -> int& { return c.eval.clusters; });
  Number<int>(r, "eval.segment", [](RunConfig& c) -> int& { return c.eval.segment; });
  Number<int>(r, "eval.probe_hidden", [](RunConfig& c) -> int& { return c.eval.probe.hidden; });
  Number<int>(r, "eval.probe_layers", [](RunConfig& c) -> int& { return c.eval.probe.layers; });
  Number<int>(r, "eval.probe_steps", [](RunConfig& c) -> int& { return c.eval.probe.steps; });
  Number<int>(r, "eval.probe_batch", [](RunConfig& c) -> int& { return c.eval.probe.batch; });
  Number<double>(r, "eval.probe_lr", [](RunConfig& c) -> double& { return c.eval.probe.lr; });
  Number<int>(r, "eval.strip_every", [](RunConfig& c) -> int& { return c.eval.strip_every; });

  // run
  Number<uint64_t>(r, "run.seed", [](RunConfig& c) -> uint64_t& { return c.run.seed; });
  Text(r, "run.precision", [](RunConfig& c) -> std::string& { return c.run.precision; });
  Bool(r, "run.strict", [](RunConfig& c) -> bool& { return c.run.strict; });
  Text(r, "run.output_dir", [](RunConfig& c) -> std::string& { return c.run.output_dir; });
  return r;
}

const Registry& Keys() {
  static const Registry r = Build();
  return r;
}

}  // namespace

RunConfig::RunConfig() {
  env.frame_height = env.frame_width = 16;
  rep.frame_height = rep.frame_width = 16;
  rep.conv_channels = {16, 32};
  ae.lr = 1e-3;
}

void RunConfig::Validate() const {
  env.Validate();
  rep.Validate();
  loss.Validate();
  dyn.Validate();
  GRWM_REQUIRE(rep.frame_height == env.frame_height &&
                   rep.frame_width == env.frame_width,
               "representation frame size must match the environment");
  GRWM_REQUIRE(loss.projection == rep.projection,
               "loss and model disagree on the projection mode");
  GRWM_REQUIRE(data.maze.width >= 2 && data.maze.height >= 2,
               "maze must be at least 2x2 cells");
  GRWM_REQUIRE(data.collect.count >= 2 && data.collect.length >= 2,
               "need at least two trajectories of length >= 2");
  GRWM_REQUIRE(data.collect.epsilon >= 0.0 && data.collect.epsilon <= 1.0,
               "epsilon in [0, 1]");
  GRWM_REQUIRE(data.val_fraction > 0.0 && data.val_fraction < 1.0,
               "validation fraction in (0, 1)");
  GRWM_REQUIRE(ae.steps >= 1 && ae.batch >= 2 && ae.segment >= 2 && ae.lr > 0,
               "autoencoder training needs steps >= 1, batch >= 2, segment >= 2");
  GRWM_REQUIRE(ae.segment <= data.collect.length,
               "segment longer than the trajectories");
  GRWM_REQUIRE(dyn_train.steps >= 1 && dyn_train.batch >= 1 && dyn_train.lr > 0,
               "dynamics training needs steps, batch and lr > 0");
  GRWM_REQUIRE(eval.horizon >= 0 && eval.episodes >= 1, "bad eval sizes");
  GRWM_REQUIRE(eval.start >= dyn.context - 1,
               "rollout start leaves fewer context frames than m");
  GRWM_REQUIRE(eval.clusters >= 1 && eval.segment >= 2 && eval.strip_every >= 0,
               "bad eval settings");
  GRWM_REQUIRE(run.precision == "float32",
               "training runs in float32; float64 is used by grad-check only");
}

void SetKey(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = Keys().find(key);
  if (it == Keys().end()) {
    throw FormatError(FormatErrorKind::kMalformed, "unknown config key " + key);
  }
  it->second.set(cfg, value);
  // Derived fields.
  cfg.rep.frame_height = cfg.env.frame_height;
  cfg.rep.frame_width = cfg.env.frame_width;
  cfg.loss.projection = cfg.rep.projection;
}

std::string GetKey(const RunConfig& cfg, const std::string& key) {
  const auto it = Keys().find(key);
  if (it == Keys().end()) {
    throw FormatError(FormatErrorKind::kMalformed, "unknown config key " + key);
  }
  return it->second.get(cfg);
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> out;
  for (const auto& [k, e] : Keys()) out.push_back(k);
  return out;
}

void ApplyConfigText(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(FormatErrorKind::kMalformed,
                        "line " + std::to_string(number) + ": expected key = value");
    }
    SetKey(cfg, Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
}

RunConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatErrorKind::kIo, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg;
  ApplyConfigText(cfg, ss.str());
  return cfg;
}

std::string ResolvedConfigText(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& [key, e] : Keys()) {
    const std::string s = key.substr(0, key.find('.'));
    if (s != section) {
      if (!section.empty()) out += "\n";
      section = s;
    }
    out += key + " = " + e.get(cfg) + "\n";
  }
  return out;
}

}  // namespace grwm::cli
