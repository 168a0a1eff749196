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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "grwm/cli/commands.h"
#include "grwm/cli/config.h"
#include "grwm/cli/gradcheck_suite.h"
#include "grwm/common/errors.h"
#include "grwm/numcore/checkpoint.h"
#include "grwm/numcore/ops.h"

namespace grwm::cli {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "grwm");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return Main(static_cast<int>(argv.size()), argv.data());
}

TEST(ConfigTest, DefaultsValidate) {
  RunConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  EXPECT_EQ(cfg.env.frame_height, 16);
  EXPECT_EQ(cfg.rep.frame_height, 16);
}

TEST(ConfigTest, UnknownKeyRejected) {
  RunConfig cfg;
  EXPECT_THROW(SetKey(cfg, "loss.lambda_unifrom", "0"), FormatError);
  EXPECT_THROW(ApplyConfigText(cfg, "nosection = 1\n"), FormatError);
}

TEST(ConfigTest, BadValuesRejected) {
  RunConfig cfg;
  EXPECT_THROW(SetKey(cfg, "data.count", "12x"), FormatError);
  EXPECT_THROW(SetKey(cfg, "loss.beta", ""), FormatError);
  EXPECT_THROW(SetKey(cfg, "dynamics.backend", "gan"), FormatError);
  EXPECT_THROW(SetKey(cfg, "run.strict", "yes"), FormatError);
  EXPECT_THROW(ApplyConfigText(cfg, "data.count 12\n"), FormatError);
}

TEST(ConfigTest, ParsesCommentsAndOverrides) {
  RunConfig cfg;
  ApplyConfigText(cfg,
                  "# comment\n"
                  "loss.lambda_uniform = 0.5  # trailing\n"
                  "\n"
                  "loss.lambda_uniform = 0\n"
                  "env.frame_width = 24\n"
                  "repmodel.projection = without_head\n"
                  "repmodel.conv_channels = 8, 16\n");
  EXPECT_EQ(cfg.loss.lambda_uniform, 0.0);
  EXPECT_EQ(cfg.rep.frame_width, 24);
  EXPECT_EQ(cfg.loss.projection, geomloss::ProjectionMode::kWithoutHead);
  EXPECT_EQ(cfg.rep.conv_channels, (std::vector<int>{8, 16}));
}

TEST(ConfigTest, ResolvedTextRoundTrips) {
  RunConfig cfg;
  SetKey(cfg, "dynamics.backend", "diffusion");
  SetKey(cfg, "env.turn_degrees", "30");
  SetKey(cfg, "loss.beta", "1e-6");
  SetKey(cfg, "data.epsilon", "0.35");
  const std::string text = ResolvedConfigText(cfg);
  RunConfig again;
  ApplyConfigText(again, text);
  EXPECT_EQ(ResolvedConfigText(again), text);
  for (const std::string& key : ConfigKeys()) {
    EXPECT_EQ(GetKey(again, key), GetKey(cfg, key)) << key;
  }
  EXPECT_EQ(again.dyn, cfg.dyn);
  EXPECT_EQ(again.rep, cfg.rep);
  EXPECT_EQ(again.env.Digest(), cfg.env.Digest());
}

TEST(ConfigTest, CrossSectionChecks) {
  RunConfig cfg;
  cfg.run.precision = "float64";
  EXPECT_THROW(cfg.Validate(), ContractViolation);
  cfg = RunConfig();
  cfg.eval.start = 1;  // fewer than m context frames
  EXPECT_THROW(cfg.Validate(), ContractViolation);
}

TEST(GradCheckSuiteTest, AllPass) {
  const auto cases = StandardGradChecks();
  for (const auto& r : RunGradChecks(cases)) {
    EXPECT_TRUE(r.passed) << r.name << " " << r.max_rel_error << " at "
                          << r.worst;
    EXPECT_LT(r.max_rel_error, 1e-6) << r.name;
  }
}

TEST(GradCheckSuiteTest, CorruptedGradientReported) {
  // d/dx x^2 deliberately reported as x.
  GradCheckCase bad{"bad_square",
                    [](numcore::Tape<double>& tape,
                       const std::vector<numcore::Var<double>>& v) {
                      numcore::Var<double> x = v[0];
                      numcore::Tensor<double> y = x.value();
                      for (double& e : y.values()) e *= e;
                      numcore::Var<double> out = tape.Record(
                          "bad_square", y, {x.id},
                          [x](numcore::Tape<double>& t, int self) {
                            const auto& g = t.grad(self);
                            auto& gx = t.grad(x.id);
                            for (int64_t i = 0; i < g.size(); ++i) {
                              gx[i] += g[i] * x.value()[i];
                            }
                          });
                      return numcore::ops::Sum(out);
                    },
                    {numcore::Tensor<double>({3}, std::vector<double>{0.5, -1, 2})}};
  const auto r = RunGradChecks({bad});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_FALSE(r[0].passed);
  EXPECT_EQ(r[0].name, "bad_square");
}

// A small end-to-end setup shared by the command tests.
class CommandTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(fs::path(::testing::TempDir()) / "grwm_cli_test");
    fs::remove_all(*dir_);
    fs::create_directories(*dir_);
    std::ofstream(*dir_ / "small.cfg") << "data.count = 24\n"
                                          "data.length = 40\n"
                                          "repmodel.steps = 15\n"
                                          "repmodel.feature_width = 32\n"
                                          "repmodel.decoder_hidden = 64\n"
                                          "dynamics.width = 32\n"
                                          "dynamics.steps = 40\n"
                                          "dynamics.batch = 32\n"
                                          "eval.episodes = 2\n"
                                          "eval.start = 6\n"
                                          "eval.horizon = 16\n"
                                          "eval.clusters = 4\n"
                                          "eval.probe_steps = 30\n";
    ASSERT_EQ(Invoke({"gen-data", "--config", Cfg(), "--out", Dir("data")}), 0);
    ASSERT_EQ(Invoke({"train-ae", "--config", Cfg(), "--data", Data(), "--out",
                   Dir("ae")}), 0);
    ASSERT_EQ(Invoke({"train-dyn", "--config", Cfg(), "--data", Data(), "--ae",
                   Dir("ae") + "/ae.ckpt", "--out", Dir("dyn")}), 0);
    ASSERT_EQ(Invoke({"train-dyn", "--config", Cfg(), "--data", Data(),
                   "--backend", "oracle", "--out", Dir("oracle")}), 0);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
  }
  static std::string Cfg() { return (*dir_ / "small.cfg").string(); }
  static std::string Dir(const std::string& name) {
    return (*dir_ / name).string();
  }
  static std::string Data() { return Dir("data") + "/dataset.grwd"; }
  static int Eval(const std::string& out) {
    return Invoke({"eval", "--config", Cfg(), "--data", Data(), "--ae",
                Dir("ae") + "/ae.ckpt", "--dyn", Dir("dyn") + "/dyn.ckpt",
                "--dyn", "truth=" + Dir("oracle") + "/dyn.ckpt", "--out",
                Dir(out)});
  }
  static fs::path* dir_;
};

fs::path* CommandTest::dir_ = nullptr;

TEST_F(CommandTest, GenDataOutputs) {
  const std::string report = Slurp(Dir("data") + "/collection.json");
  EXPECT_NE(report.find("\"replay_ok\": true"), std::string::npos);
  EXPECT_NE(report.find("\"cells_visited\": 9"), std::string::npos);
  EXPECT_TRUE(fs::exists(Dir("data") + "/resolved.cfg"));
  ASSERT_EQ(Invoke({"gen-data", "--config", Cfg(), "--out", Dir("data2")}), 0);
  EXPECT_EQ(Slurp(Dir("data") + "/dataset.grwd"),
            Slurp(Dir("data2") + "/dataset.grwd"));
}

TEST_F(CommandTest, TrainAeLogHasEveryTerm) {
  const std::string log = Slurp(Dir("ae") + "/ae_log.csv");
  EXPECT_EQ(log.substr(0, log.find('\n')), "step,lr,recon,kl,slow,uniform,total");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 16);
}

TEST_F(CommandTest, ResolvedConfigReExecutes) {
  // The snapshot alone reproduces the run.
  const std::string snap = Dir("ae") + "/resolved.cfg";
  ASSERT_EQ(Invoke({"train-ae", "--config", snap, "--data", Data(), "--out",
                 Dir("ae_again")}), 0);
  EXPECT_EQ(Slurp(Dir("ae") + "/ae.ckpt"), Slurp(Dir("ae_again") + "/ae.ckpt"));
}

TEST_F(CommandTest, EvalOutputsAndDeterminism) {
  ASSERT_EQ(Eval("eval1"), 0);
  ASSERT_EQ(Eval("eval2"), 0);
  const std::string m = Slurp(Dir("eval1") + "/metrics.json");
  EXPECT_EQ(m, Slurp(Dir("eval2") + "/metrics.json"));
  EXPECT_NE(m.find("\"probe\""), std::string::npos);
  EXPECT_NE(m.find("\"dispersion\""), std::string::npos);
  EXPECT_NE(m.find("\"truth\""), std::string::npos);
  const std::string curves = Slurp(Dir("eval1") + "/curves.csv");
  EXPECT_EQ(curves.substr(0, curves.find('\n')), "t,regressor,truth");
  EXPECT_EQ(std::count(curves.begin(), curves.end(), '\n'), 17);
  const std::string clusters = Slurp(Dir("eval1") + "/clusters.csv");
  EXPECT_EQ(clusters.substr(0, clusters.find('\n')), "frame,x,y,cluster");
  const std::string strip = Slurp(Dir("eval1") + "/strip_0.ppm");
  EXPECT_EQ(strip.substr(0, 2), "P6");
}

TEST_F(CommandTest, ParallelEvalMatchesStrict) {
  ASSERT_EQ(Eval("eval_strict"), 0);
  ASSERT_EQ(Invoke({"eval", "--config", Cfg(), "--set", "run.strict=false",
                 "--data", Data(), "--ae", Dir("ae") + "/ae.ckpt", "--dyn",
                 Dir("dyn") + "/dyn.ckpt", "--dyn",
                 "truth=" + Dir("oracle") + "/dyn.ckpt", "--out",
                 Dir("eval_par")}), 0);
  EXPECT_EQ(Slurp(Dir("eval_strict") + "/metrics.json"),
            Slurp(Dir("eval_par") + "/metrics.json"));
}

TEST_F(CommandTest, ProbeOnly) {
  ASSERT_EQ(Invoke({"eval", "--config", Cfg(), "--data", Data(), "--ae",
                 Dir("ae") + "/ae.ckpt", "--probe-only", "--out",
                 Dir("probe")}), 0);
  const std::string m = Slurp(Dir("probe") + "/metrics.json");
  EXPECT_NE(m.find("\"probe\""), std::string::npos);
  EXPECT_EQ(m.find("\"rollouts\""), std::string::npos);
  EXPECT_FALSE(fs::exists(Dir("probe") + "/curves.csv"));
}

TEST_F(CommandTest, ExitCodes) {
  // Unknown key, bad flag, unknown suite: config errors.
  EXPECT_EQ(Invoke({"gen-data", "--set", "data.nope=1", "--out", Dir("x")}), 2);
  EXPECT_EQ(Invoke({"gen-data", "--bogus"}), 2);
  EXPECT_EQ(Invoke({"ablate", "--suite", "colors", "--out", Dir("x")}), 2);
  // Missing or corrupt dataset: data errors.
  EXPECT_EQ(Invoke({"train-ae", "--config", Cfg(), "--data", Dir("missing.grwd"),
                 "--out", Dir("x")}), 3);
  std::ofstream(Dir("junk.grwd")) << "not a dataset";
  EXPECT_EQ(Invoke({"train-ae", "--config", Cfg(), "--data", Dir("junk.grwd"),
                 "--out", Dir("x")}), 3);
  // Representation config that differs from the checkpoint.
  EXPECT_EQ(Invoke({"train-dyn", "--config", Cfg(), "--set",
                 "repmodel.latent_dim=16", "--data", Data(), "--ae",
                 Dir("ae") + "/ae.ckpt", "--out", Dir("x")}), 2);
  // Dataset rendered under another environment.
  EXPECT_EQ(Invoke({"train-ae", "--config", Cfg(), "--set", "env.fov_degrees=80",
                 "--data", Data(), "--out", Dir("x")}), 2);
}

TEST_F(CommandTest, OutputRootFromEnvironment) {
  setenv("GRWM_OUTPUT_ROOT", Dir("root").c_str(), 1);
  const int code = Invoke({"gen-data", "--config", Cfg()});
  unsetenv("GRWM_OUTPUT_ROOT");
  ASSERT_EQ(code, 0);
  EXPECT_TRUE(fs::exists(Dir("root") + "/gen-data/dataset.grwd"));
}

TEST_F(CommandTest, AblationSuiteWritesTable) {
  ASSERT_EQ(Invoke({"ablate", "--config", Cfg(), "--set", "repmodel.steps=3",
                 "--set", "eval.probe_steps=5", "--suite", "projection",
                 "--data", Data(), "--out", Dir("abl")}), 0);
  const std::string csv = Slurp(Dir("abl") + "/ablation_projection.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(csv.find("with_head,ok"), std::string::npos);
  EXPECT_NE(csv.find("without_head,ok"), std::string::npos);
}

TEST_F(CommandTest, AblationFailuresAreRecordedPerCell) {
  // More clusters than held-out frames fails inside every variant; each
  // failure lands in its own row and the command still completes.
  ASSERT_EQ(Invoke({"ablate", "--config", Cfg(), "--set", "repmodel.steps=2",
                 "--set", "eval.probe_steps=5", "--set", "eval.clusters=200",
                 "--suite", "slow-mode", "--data", Data(), "--out",
                 Dir("abl_fail")}), 0);
  const std::string csv = Slurp(Dir("abl_fail") + "/ablation_slow-mode.csv");
  EXPECT_NE(csv.find("all_pairs,error"), std::string::npos);
  EXPECT_NE(csv.find("adjacent,error"), std::string::npos);
}

TEST(GradCheckCommandTest, FreshBuildPasses) {
  EXPECT_EQ(Invoke({"grad-check"}), 0);
}

}  // namespace
}  // namespace grwm::cli
