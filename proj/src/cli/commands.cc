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

#include "grwm/cli/commands.h"

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>

#include "grwm/cli/config.h"
#include "grwm/cli/gradcheck_suite.h"
#include "grwm/cli/pipeline.h"
#include "grwm/common/errors.h"
#include "grwm/numcore/checkpoint.h"

namespace grwm::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Raised for problems with the command line or configuration, so they map
// to the config exit code wherever they surface.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string Num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw FormatError(FormatErrorKind::kIo, "cannot write " + path.string());
  }
}

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
};

void AddCommon(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value config file");
  app->add_option("--set", c.sets, "override one key, as key=value");
  app->add_option("--out", c.out, "output directory");
}

// File, then --set, then command-specific flags; the result is validated
// and its output directory created.
RunConfig Resolve(const Common& c, const std::string& command,
                  const std::vector<std::pair<std::string, std::string>>& flags) {
  RunConfig cfg;
  try {
    if (!c.config.empty()) cfg = LoadConfig(c.config);
    for (const std::string& s : c.sets) {
      const size_t eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value: " + s);
      SetKey(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [k, v] : flags) SetKey(cfg, k, v);
    cfg.Validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (!c.out.empty()) {
    cfg.run.output_dir = c.out;
  } else if (cfg.run.output_dir.empty()) {
    const char* root = std::getenv("GRWM_OUTPUT_ROOT");
    cfg.run.output_dir = (fs::path(root && *root ? root : "runs") / command).string();
  }
  fs::create_directories(cfg.run.output_dir);
  WriteText(fs::path(cfg.run.output_dir) / "resolved.cfg", ResolvedConfigText(cfg));
  return cfg;
}

fs::path OutPath(const RunConfig& cfg, const std::string& name) {
  return fs::path(cfg.run.output_dir) / name;
}

Json ReportJson(const geomloss::LossReport& r) {
  return Json{{"recon", r.recon}, {"kl", r.kl}, {"slow", r.slow},
              {"uniform", r.uniform}, {"total", r.total}};
}

// --- gen-data ---------------------------------------------------------------

int GenData(const RunConfig& cfg) {
  const trajectories::Dataset ds = GenerateData(cfg);
  const fs::path path = OutPath(cfg, "dataset.grwd");
  trajectories::WriteDataset(path.string(), ds);
  const mazeworld::MazeMap map =
      cfg.data.maze.Build(static_cast<int>(cfg.env.palette.size()));
  const trajectories::CoverageReport cov = trajectories::Coverage(ds, map);
  const int mismatch = trajectories::FirstReplayMismatch(ds, map, cfg.env);
  Json report{{"trajectories", ds.header.count},
              {"length", ds.header.length},
              {"cells_total", cov.cells_total},
              {"cells_visited", cov.cells_visited},
              {"coverage", double(cov.cells_visited) / cov.cells_total},
              {"action_counts", {{"forward", cov.action_counts[0]},
                                 {"turn_left", cov.action_counts[1]},
                                 {"turn_right", cov.action_counts[2]}}},
              {"visits_per_cell", cov.visits_per_cell},
              {"replay_ok", mismatch < 0}};
  WriteText(OutPath(cfg, "collection.json"), report.dump(2) + "\n");
  std::cerr << "wrote " << path.string() << ": " << cov.cells_visited << "/"
            << cov.cells_total << " cells visited\n";
  if (mismatch >= 0) {
    throw FormatError(FormatErrorKind::kMalformed,
                      "trajectory " + std::to_string(mismatch) + " fails replay");
  }
  return kExitOk;
}

// --- train-ae ---------------------------------------------------------------

int TrainAe(const RunConfig& cfg, const std::string& data_path) {
  const DataBundle data = LoadData(cfg, data_path);
  std::string log = "step,lr,recon,kl,slow,uniform,total\n";
  geomloss::LossReport last;
  auto model = std::make_unique<repmodel::RepModel<float>>(cfg.rep, cfg.run.seed);
  repmodel::AeTrainConfig ae = cfg.ae;
  ae.seed = cfg.run.seed;
  const auto on_step = [&](const repmodel::AeLogRow& r) {
    last = r.report;
    log += std::to_string(r.step) + "," + Num(r.lr) + "," + Num(r.report.recon) +
           "," + Num(r.report.kl) + "," + Num(r.report.slow) + "," +
           Num(r.report.uniform) + "," + Num(r.report.total) + "\n";
    if (r.step % 100 == 0) {
      std::cerr << "step " << r.step << "/" << ae.steps << " recon "
                << r.report.recon << " slow " << r.report.slow << " uniform "
                << r.report.uniform << "\n";
    }
  };
  int code = kExitOk;
  std::string status = "ok";
  try {
    repmodel::TrainAutoencoder(*model, data.ds, data.train, cfg.loss, ae,
                               on_step);
  } catch (const NumericFailure& e) {
    // Parameters were rolled back to the last finite step.
    std::cerr << "numeric failure: " << e.what() << "\n";
    status = std::string("numeric failure: ") + e.what();
    code = kExitNumeric;
  }
  numcore::WriteCheckpoint(OutPath(cfg, "ae.ckpt").string(), RepCheckpoint(*model));
  WriteText(OutPath(cfg, "ae_log.csv"), log);
  Json summary{{"status", status}, {"final_train", ReportJson(last)}};
  if (code == kExitOk) {
    summary["heldout"] = ReportJson(Diagnose(cfg, data, *model));
  }
  WriteText(OutPath(cfg, "ae_summary.json"), summary.dump(2) + "\n");
  return code;
}

std::unique_ptr<repmodel::RepModel<float>> LoadAe(const RunConfig& cfg,
                                                  const std::string& path) {
  auto rep = RepFromCheckpoint(numcore::ReadCheckpoint(path));
  if (rep->config().frame_height != cfg.env.frame_height ||
      rep->config().frame_width != cfg.env.frame_width) {
    throw FormatError(FormatErrorKind::kConfigMismatch,
                      path + " was trained on a different frame size");
  }
  return rep;
}

// --- train-dyn --------------------------------------------------------------

int TrainDyn(const RunConfig& cfg, const std::string& data_path,
             const std::string& ae_path) {
  const DataBundle data = LoadData(cfg, data_path);
  std::unique_ptr<repmodel::RepModel<float>> rep;
  uint64_t digest = 0;
  if (cfg.dyn.backend != latdyn::Backend::kOracle) {
    if (ae_path.empty()) throw ConfigError("--ae is required for learned backends");
    rep = LoadAe(cfg, ae_path);
    digest = rep->config().Digest();
    if (digest != cfg.rep.Digest()) {
      throw FormatError(FormatErrorKind::kConfigMismatch,
                        ae_path + " does not match the configured repmodel section");
    }
  }
  std::string log = "step,lr,loss\n";
  const int steps = cfg.dyn_train.steps;
  auto dyn = TrainDynamicsModel(cfg, data, rep.get(),
                                [&](int64_t step, double lr, double loss) {
    log += std::to_string(step) + "," + Num(lr) + "," + Num(loss) + "\n";
    if (step % 500 == 0) {
      std::cerr << "step " << step << "/" << steps << " loss " << loss << "\n";
    }
  });
  numcore::WriteCheckpoint(OutPath(cfg, "dyn.ckpt").string(),
                           DynCheckpoint(*dyn, digest));
  WriteText(OutPath(cfg, "dyn_log.csv"), log);
  return kExitOk;
}

// --- eval -------------------------------------------------------------------

// Frames stacked top to bottom; all must share a width.
mazeworld::Frame StackRows(const std::vector<mazeworld::Frame>& rows) {
  mazeworld::Frame out{0, rows.front().width, {}};
  for (const mazeworld::Frame& r : rows) {
    out.height += r.height;
    out.rgb.insert(out.rgb.end(), r.rgb.begin(), r.rgb.end());
  }
  return out;
}

struct DynEntry {
  std::string label;
  LoadedDyn dyn;
};

int Eval(const RunConfig& cfg, const std::string& data_path,
         const std::string& ae_path, const std::vector<std::string>& dyn_args,
         bool probe_only) {
  const DataBundle data = LoadData(cfg, data_path);
  std::unique_ptr<repmodel::RepModel<float>> rep;
  if (!ae_path.empty()) rep = LoadAe(cfg, ae_path);
  if (!rep && (probe_only || dyn_args.empty())) {
    throw ConfigError("nothing to evaluate: pass --ae and/or --dyn");
  }

  std::vector<DynEntry> dyns;
  if (!probe_only) {
    for (const std::string& arg : dyn_args) {
      const size_t eq = arg.find('=');
      const std::string path = eq == std::string::npos ? arg : arg.substr(eq + 1);
      DynEntry e{eq == std::string::npos ? "" : arg.substr(0, eq),
                 DynFromCheckpoint(numcore::ReadCheckpoint(path))};
      const bool oracle = e.dyn.model->config().backend == latdyn::Backend::kOracle;
      if (e.label.empty()) e.label = latdyn::BackendName(e.dyn.model->config().backend);
      if (!oracle) {
        if (!rep) throw ConfigError(path + " needs --ae");
        if (e.dyn.rep_digest != rep->config().Digest()) {
          throw FormatError(FormatErrorKind::kConfigMismatch,
                            path + " was trained on a different representation");
        }
      }
      for (const DynEntry& other : dyns) {
        if (other.label == e.label) throw ConfigError("duplicate model label " + e.label);
      }
      dyns.push_back(std::move(e));
    }
  }

  Json metrics;
  metrics["seed"] = cfg.run.seed;
  metrics["heldout_trajectories"] = data.val.size();
  if (rep) {
    std::cerr << "probing\n";
    const evalkit::ProbeReport probe = ProbeRepresentation(cfg, data, *rep);
    metrics["probe"] = Json{{"mse", probe.mse},
                            {"x", probe.component_mse[0]},
                            {"y", probe.component_mse[1]},
                            {"sin", probe.component_mse[2]},
                            {"cos", probe.component_mse[3]},
                            {"train_size", probe.train_size},
                            {"val_size", probe.val_size}};
  }
  if (rep && !probe_only) {
    std::cerr << "clustering\n";
    const ClusterOutput cl = ClusterRepresentation(cfg, data, *rep);
    metrics["clusters"] = Json{{"k", cl.report.k},
                               {"dispersion", cl.report.dispersion},
                               {"counts", cl.report.counts}};
    std::string csv = "frame,x,y,cluster\n";
    for (size_t i = 0; i < cl.positions.size(); ++i) {
      csv += std::to_string(i) + "," + Num(cl.positions[i][0]) + "," +
             Num(cl.positions[i][1]) + "," +
             std::to_string(cl.report.assignments[i]) + "\n";
    }
    WriteText(OutPath(cfg, "clusters.csv"), csv);
    metrics["diagnostics"] = ReportJson(Diagnose(cfg, data, *rep));
  }

  if (!dyns.empty()) {
    const int strips = cfg.eval.strip_every > 0 ? std::min(cfg.eval.episodes, 4) : 0;
    // strip_rows[episode] = truth row, then one row per model.
    std::vector<std::vector<mazeworld::Frame>> strip_rows(strips);
    const auto pick = [&](const std::vector<mazeworld::Frame>& frames) {
      std::vector<mazeworld::Frame> out;
      for (int t = cfg.eval.strip_every; t <= cfg.eval.horizon;
           t += cfg.eval.strip_every) {
        out.push_back(frames[t - 1]);
      }
      return mazeworld::ConcatFramesHorizontally(out);
    };
    std::vector<evalkit::MetricCurve> curves;
    Json rollouts;
    for (const DynEntry& e : dyns) {
      std::cerr << "rolling out " << e.label << "\n";
      curves.push_back(RolloutCurve(
          cfg, data, rep.get(), *e.dyn.model,
          [&](int ep, const std::vector<mazeworld::Frame>& pred,
              const std::vector<mazeworld::Frame>& truth) {
            if (ep >= strips || cfg.eval.horizon < cfg.eval.strip_every) return;
            if (strip_rows[ep].empty()) strip_rows[ep].push_back(pick(truth));
            strip_rows[ep].push_back(pick(pred));
          }));
      const evalkit::MetricCurve& c = curves.back();
      rollouts[e.label] = Json{
          {"backend", latdyn::BackendName(e.dyn.model->config().backend)},
          {"episodes", c.episodes},
          {"aggregation", evalkit::AggregationName(c.mode)},
          {"horizon", c.horizon},
          {"mean_mse", c.horizon > 0 ? c.MeanOver(1, c.horizon) : 0.0},
          {"max_mse", c.values.empty() ? 0.0
                                       : *std::max_element(c.values.begin(),
                                                           c.values.end())},
          {"curve", c.values}};
    }
    metrics["rollouts"] = rollouts;
    std::string csv = "t";
    for (const DynEntry& e : dyns) csv += "," + e.label;
    csv += "\n";
    for (int t = 1; t <= cfg.eval.horizon; ++t) {
      csv += std::to_string(t);
      for (const auto& c : curves) csv += "," + Num(c.values[t - 1]);
      csv += "\n";
    }
    WriteText(OutPath(cfg, "curves.csv"), csv);
    for (int ep = 0; ep < strips; ++ep) {
      if (strip_rows[ep].empty()) continue;
      mazeworld::WritePpm(
          OutPath(cfg, "strip_" + std::to_string(ep) + ".ppm").string(),
          StackRows(strip_rows[ep]));
    }
  }
  WriteText(OutPath(cfg, "metrics.json"), metrics.dump(2) + "\n");
  return kExitOk;
}

// --- ablate -----------------------------------------------------------------

using Overrides = std::vector<std::pair<std::string, std::string>>;

const Overrides kVanilla = {{"loss.beta", "0"},
                            {"loss.lambda_slow", "0"},
                            {"loss.lambda_uniform", "0"}};

std::vector<std::pair<std::string, Overrides>> Suite(const std::string& name) {
  if (name == "losses") {
    return {{"vanilla", kVanilla},
            {"full", {}},
            {"without_uniform", {{"loss.lambda_uniform", "0"}}},
            {"without_slow", {{"loss.lambda_slow", "0"}}}};
  }
  if (name == "projection") {
    return {{"with_head", {{"repmodel.projection", "with_head"}}},
            {"without_head", {{"repmodel.projection", "without_head"}}}};
  }
  if (name == "slow-mode") {
    return {{"all_pairs", {{"loss.slow_mode", "all_pairs"}}},
            {"adjacent", {{"loss.slow_mode", "adjacent"}}}};
  }
  if (name == "latent-dim") {
    std::vector<std::pair<std::string, Overrides>> out;
    for (const char* d : {"16", "32", "64", "128"}) {
      Overrides vanilla = kVanilla;
      vanilla.push_back({"repmodel.latent_dim", d});
      out.push_back({std::string("vanilla_d") + d, vanilla});
      out.push_back({std::string("grwm_d") + d, {{"repmodel.latent_dim", d}}});
    }
    return out;
  }
  throw ConfigError("unknown suite " + name +
                    " (losses, projection, latent-dim, slow-mode)");
}

int Ablate(const RunConfig& base, const std::string& suite,
           const std::string& data_path) {
  const auto variants = Suite(suite);
  const DataBundle data = data_path.empty()
                              ? BundleData(base, GenerateData(base))
                              : LoadData(base, data_path);
  std::string csv =
      "variant,status,train_recon,recon,kl,slow,uniform,probe_mse,dispersion\n";
  for (const auto& [name, overrides] : variants) {
    std::cerr << "variant " << name << "\n";
    std::string row = name;
    try {
      RunConfig cfg = base;
      for (const auto& [k, v] : overrides) SetKey(cfg, k, v);
      cfg.Validate();
      geomloss::LossReport last;
      auto rep = TrainRepresentation(cfg, data, [&](const repmodel::AeLogRow& r) {
        last = r.report;
      });
      const geomloss::LossReport d = Diagnose(cfg, data, *rep);
      const evalkit::ProbeReport probe = ProbeRepresentation(cfg, data, *rep);
      const ClusterOutput cl = ClusterRepresentation(cfg, data, *rep);
      row += ",ok," + Num(last.recon) + "," + Num(d.recon) + "," + Num(d.kl) +
             "," + Num(d.slow) + "," + Num(d.uniform) + "," + Num(probe.mse) +
             "," + Num(cl.report.dispersion);
    } catch (const std::exception& e) {
      // Recorded per cell; the suite carries on.
      std::string what = e.what();
      std::replace(what.begin(), what.end(), ',', ';');
      std::replace(what.begin(), what.end(), '\n', ' ');
      row += ",error: " + what + ",,,,,,,";
    }
    csv += row + "\n";
    WriteText(OutPath(base, "ablation_" + suite + ".csv"), csv);
  }
  return kExitOk;
}

// --- grad-check -------------------------------------------------------------

int GradCheck() {
  const auto results = RunGradChecks(StandardGradChecks());
  int failed = 0;
  for (const auto& r : results) {
    std::printf("%-22s max_rel_error %.3e tolerance %.0e entries %4lld %s\n",
                r.name.c_str(), r.max_rel_error, r.tolerance,
                static_cast<long long>(r.entries_checked),
                r.passed ? "PASS" : "FAIL");
    if (!r.passed) {
      ++failed;
      std::printf("  worst entry: %s\n", r.worst.c_str());
    }
  }
  std::printf("%d/%zu gradient checks passed\n",
              static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? kExitOk : kExitNumeric;
}

}  // namespace

int Main(int argc, char** argv) {
  CLI::App app{"Geometrically regularized world models on a maze renderer"};
  app.require_subcommand(1);
  std::function<int()> action;

  Common gen_c;
  CLI::App* gen = app.add_subcommand("gen-data", "collect a trajectory dataset");
  AddCommon(gen, gen_c);
  gen->callback([&] {
    action = [&] { return GenData(Resolve(gen_c, "gen-data", {})); };
  });

  Common ae_c;
  std::string ae_data, slow_mode;
  CLI::App* ae = app.add_subcommand("train-ae", "train the representation model");
  AddCommon(ae, ae_c);
  ae->add_option("--data", ae_data, "dataset file")->required();
  ae->add_option("--slow-mode", slow_mode, "all_pairs or adjacent");
  ae->callback([&] {
    action = [&] {
      Overrides f;
      if (!slow_mode.empty()) f.push_back({"loss.slow_mode", slow_mode});
      return TrainAe(Resolve(ae_c, "train-ae", f), ae_data);
    };
  });

  Common dyn_c;
  std::string dyn_data, dyn_ae, backend;
  CLI::App* dyn = app.add_subcommand("train-dyn", "train a dynamics backend");
  AddCommon(dyn, dyn_c);
  dyn->add_option("--data", dyn_data, "dataset file")->required();
  dyn->add_option("--ae", dyn_ae, "representation checkpoint");
  dyn->add_option("--backend", backend, "regressor, diffusion or oracle");
  dyn->callback([&] {
    action = [&] {
      Overrides f;
      if (!backend.empty()) f.push_back({"dynamics.backend", backend});
      return TrainDyn(Resolve(dyn_c, "train-dyn", f), dyn_data, dyn_ae);
    };
  });

  Common ev_c;
  std::string ev_data, ev_ae;
  std::vector<std::string> ev_dyn;
  int horizon = -1, episodes = -1;
  bool probe_only = false;
  CLI::App* ev = app.add_subcommand("eval", "rollouts, probe, clusters");
  AddCommon(ev, ev_c);
  ev->add_option("--data", ev_data, "dataset file")->required();
  ev->add_option("--ae", ev_ae, "representation checkpoint");
  ev->add_option("--dyn", ev_dyn, "dynamics checkpoint, optionally label=path");
  ev->add_option("--horizon", horizon, "rollout length");
  ev->add_option("--episodes", episodes, "held-out episodes");
  ev->add_flag("--probe-only", probe_only, "only the probe report");
  ev->callback([&] {
    action = [&] {
      Overrides f;
      if (horizon >= 0) f.push_back({"eval.horizon", std::to_string(horizon)});
      if (episodes >= 0) f.push_back({"eval.episodes", std::to_string(episodes)});
      return Eval(Resolve(ev_c, "eval", f), ev_data, ev_ae, ev_dyn, probe_only);
    };
  });

  Common ab_c;
  std::string suite, ab_data;
  CLI::App* ab = app.add_subcommand("ablate", "run an ablation suite");
  AddCommon(ab, ab_c);
  ab->add_option("--suite", suite, "losses, projection, latent-dim, slow-mode")
      ->required();
  ab->add_option("--data", ab_data, "dataset file (generated when omitted)");
  ab->callback([&] {
    action = [&] {
      Suite(suite);  // reject unknown names before any work
      return Ablate(Resolve(ab_c, "ablate-" + suite, {}), suite, ab_data);
    };
  });

  CLI::App* gc = app.add_subcommand("grad-check", "finite-difference suite");
  gc->callback([&] { action = [] { return GradCheck(); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  try {
    return action();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ContractViolation& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << e.what() << "\n";
    return e.kind() == FormatErrorKind::kConfigMismatch ? kExitConfig : kExitData;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure in " << e.op() << ": " << e.what() << "\n";
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    std::cerr << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace grwm::cli
