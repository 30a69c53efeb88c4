#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "pfsyn/cli.hpp"
#include "pfsyn/synthesis.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pfsyn::cli {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
  json report() const { return json::parse(out); }
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("pfsyn_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override {
    fs::remove_all(dir_);
    ::unsetenv("PFSYN_LP_TOL");
  }
  std::string tmp(const std::string& name) const { return (dir_ / name).string(); }
  static std::string model(const std::string& name) { return fixtures::data_path("models/" + name); }
  static std::string gains(const std::string& name) { return fixtures::data_path("gains/" + name); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(tmp(name)) << text;
    return tmp(name);
  }

  static std::vector<std::string> lines_of(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
  }

  fs::path dir_;
};

TEST_F(Cli, AnalyzeExample1) {
  const Outcome o = invoke({"--json", "analyze", model("example1.json")});
  EXPECT_EQ(o.code, kExitNegative);
  const json r = o.report();
  EXPECT_EQ(r["command"], "analyze");
  EXPECT_TRUE(r["verdicts"]["positivity"]["positive"].get<bool>());
  EXPECT_FALSE(r["verdicts"]["LP1"]["feasible"].get<bool>());
  EXPECT_FALSE(r["verdicts"]["LP2"]["feasible"].get<bool>());
  EXPECT_NEAR(r["verdicts"]["perron_radii"][0].get<double>(), 1.1083, 1e-3);

  // The global flag is accepted after the subcommand too.
  EXPECT_EQ(invoke({"analyze", model("example1.json"), "--json"}).report()["command"], "analyze");

  const Outcome text = invoke({"analyze", model("example1.json")});
  EXPECT_NE(text.out.find("LP2: infeasible"), std::string::npos);
  EXPECT_NE(text.out.find("1.108"), std::string::npos);
}

TEST_F(Cli, AnalyzePestNamesViolation) {
  const Outcome o = invoke({"--json", "analyze", model("pest_population.json")});
  EXPECT_EQ(o.code, kExitNegative);
  const json v = o.report()["verdicts"]["positivity"];
  EXPECT_FALSE(v["positive"].get<bool>());
  const json first = v["violations"][0];
  EXPECT_EQ(first["rule"], 1);
  EXPECT_EQ(first["matrix"], "A_lower");
  EXPECT_EQ(first["row"], 1);
  EXPECT_EQ(first["col"], 1);
  EXPECT_DOUBLE_EQ(first["value"].get<double>(), -0.02);
}

TEST_F(Cli, AnalyzeStableToy) {
  const Outcome o = invoke({"--json", "analyze", model("stable_toy.json")});
  EXPECT_EQ(o.code, kExitOk);
  const json lp2 = o.report()["verdicts"]["LP2"];
  EXPECT_TRUE(lp2["feasible"].get<bool>());
  EXPECT_EQ(lp2["p"].size(), 2u);
}

TEST_F(Cli, LoadErrorsExitOneWithoutVerdict) {
  Outcome o = invoke({"--json", "analyze", tmp("missing.json")});
  EXPECT_EQ(o.code, kExitError);
  EXPECT_TRUE(o.out.empty());
  EXPECT_FALSE(o.err.empty());
  o = invoke({"analyze", write("bad.json", "{\"n\": 2}")});
  EXPECT_EQ(o.code, kExitError);
  EXPECT_TRUE(o.out.empty());
  o = invoke({"frobnicate"});
  EXPECT_EQ(o.code, kExitError);
  o = invoke({});
  EXPECT_EQ(o.code, kExitError);
}

TEST_F(Cli, SynthesizeExample1ThenVerify) {
  const std::string out = tmp("gains.json");
  const Outcome o = invoke({"--json", "synthesize", model("example1.json"), "--mode", "standard", "-o", out});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const json r = o.report();
  EXPECT_TRUE(r["verdicts"]["feasible"].get<bool>());
  EXPECT_EQ(r["artifacts_written"][0], out);
  const Gains k = load_gains(out);
  ASSERT_EQ(k.size(), 2u);
  EXPECT_EQ(k[0].rows(), 1u);
  EXPECT_EQ(k[0].cols(), 2u);
  EXPECT_EQ(invoke({"verify", model("example1.json"), out}).code, kExitOk);
}

TEST_F(Cli, SynthesizePestAutoSelectsRobust) {
  const Outcome o = invoke({"--json", "synthesize", model("pest_population.json"), "-o", tmp("g.json")});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const json r = o.report()["verdicts"];
  EXPECT_EQ(r["mode"], "robust");
  EXPECT_TRUE(r["mode_auto_selected"].get<bool>());
  EXPECT_EQ(invoke({"verify", model("pest_population.json"), tmp("g.json")}).code, kExitOk);
}

TEST_F(Cli, SynthesizeInfeasibleAndMisuse) {
  const Outcome o = invoke({"--json", "synthesize", model("unstable_toy.json"), "-o", tmp("g.json")});
  EXPECT_EQ(o.code, kExitNegative);
  EXPECT_FALSE(o.report()["verdicts"]["feasible"].get<bool>());
  EXPECT_FALSE(fs::exists(tmp("g.json")));
  EXPECT_EQ(invoke({"synthesize", model("example1.json"), "--mode", "robust"}).code, kExitError);
  EXPECT_EQ(invoke({"synthesize", model("pest_population.json"), "--mode", "standard"}).code, kExitError);
  EXPECT_EQ(invoke({"synthesize", model("example1.json"), "--mode", "bogus"}).code, kExitError);
}

TEST_F(Cli, VerifyReferenceGains) {
  Outcome o = invoke({"--json", "verify", model("example1.json"), gains("example1_reference.json")});
  ASSERT_EQ(o.code, kExitOk);
  json v = o.report()["verdicts"]["vertices"];
  ASSERT_EQ(v.size(), 4u);
  EXPECT_NEAR(v[0]["radius"].get<double>(), 0.8460, 1e-3);
  EXPECT_NEAR(v[2]["radius"].get<double>(), 0.7186, 1e-3);

  o = invoke({"--json", "verify", model("pest_population.json"), gains("pest_population_reference.json")});
  EXPECT_EQ(o.code, kExitOk);
  EXPECT_EQ(o.report()["verdicts"]["vertices"].size(), 4u);

  EXPECT_EQ(invoke({"verify", model("example1.json"), gains("example1_zero.json")}).code, kExitNegative);
  // 1x2 gains against a 3-state model.
  EXPECT_EQ(invoke({"verify", model("pest_population.json"), gains("example1_reference.json")}).code, kExitError);
}

TEST_F(Cli, SimulateOpenAndClosedLoop) {
  const std::string open = tmp("open.csv");
  Outcome o = invoke({"--json", "simulate", model("example1.json"), "--x0", "0.01,0.03", "--steps", "20", "-o", open});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_GT(o.report()["verdicts"]["final_norm"].get<double>(), o.report()["verdicts"]["initial_norm"].get<double>());
  EXPECT_NEAR(o.report()["verdicts"]["min_state"].get<double>(), 0.01, 1e-15);
  EXPECT_EQ(lines_of(open).size(), 22u);

  const std::string closed = tmp("closed.csv");
  o = invoke({"--json", "simulate", model("example1.json"), "--gains", gains("example1_reference.json"), "--x0",
              "0.01,0.03", "--steps", "60", "-o", closed});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const json v = o.report()["verdicts"];
  EXPECT_LE(v["final_norm"].get<double>(), 1e-3 * v["initial_norm"].get<double>());
  const auto lines = lines_of(closed);
  ASSERT_EQ(lines.size(), 62u);
  EXPECT_EQ(lines[0], "k,x1,x2,u1,y1,h1,h2");
}

TEST_F(Cli, SimulateErrors) {
  EXPECT_EQ(invoke({"simulate", model("example1.json"), "--x0", "0.01", "-o", tmp("t.csv")}).code, kExitError);
  EXPECT_EQ(invoke({"simulate", model("example1.json"), "--x0", "a,b", "-o", tmp("t.csv")}).code, kExitError);
  EXPECT_EQ(invoke({"simulate", model("example1.json"), "--x0", "-1,1", "-o", tmp("t.csv")}).code, kExitError);
  EXPECT_EQ(invoke({"simulate", model("example1.json"), "--x0", "-1,1", "--allow-negative-x0", "-o", tmp("t.csv")})
                .code,
            kExitOk);
  EXPECT_EQ(invoke({"simulate", model("example1.json"), "--x0", "1,1"}).code, kExitError);
  EXPECT_EQ(invoke({"simulate", model("example1.json"), "--x0", "1,1", "--realization", "sideways", "-o",
                    tmp("t.csv")})
                .code,
            kExitError);
}

TEST_F(Cli, SweepGridAndSinglePoint) {
  const std::string region = tmp("region.csv");
  const Outcome o = invoke({"--json", "sweep", model("example1.json"), "--param", "rules[0].A[1][0]=0:1.5:0.3",
                            "--param", "rules[1].A[1][0]=0:1.5:0.3", "-o", region});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_EQ(o.report()["verdicts"]["points"], 36);
  const auto lines = lines_of(region);
  ASSERT_EQ(lines.size(), 37u);
  EXPECT_EQ(lines[0], "param1,param2,feasible");
  EXPECT_EQ(lines[1].substr(0, 4), "0,0,");
  bool found = false;
  for (const std::string& l : lines) found |= l == "0.6,0.6,1";
  EXPECT_TRUE(found);

  // A single point agrees with synthesize.
  const std::string one = tmp("one.csv");
  ASSERT_EQ(invoke({"sweep", model("example1.json"), "--param", "rules[0].A[1][0]=0.6:0.6:0.1", "-o", one}).code,
            kExitOk);
  const auto single = lines_of(one);
  ASSERT_EQ(single.size(), 2u);
  const int synth = invoke({"synthesize", model("example1.json")}).code;
  EXPECT_EQ(single[1], synth == kExitOk ? "0.6,1" : "0.6,0");
}

TEST_F(Cli, SweepErrors) {
  EXPECT_EQ(invoke({"sweep", model("example1.json"), "--param", "rules[0].B[0][0]=0:1:0.5", "-o", tmp("r.csv")}).code,
            kExitError);
  EXPECT_EQ(invoke({"sweep", model("example1.json"), "--param", "rules[9].A[0][0]=0:1:0.5", "-o", tmp("r.csv")}).code,
            kExitError);
  EXPECT_EQ(invoke({"sweep", model("example1.json"), "--param", "rules[0].A[0][0]=0:1:0.5", "--param",
                    "rules[0].A[0][1]=0:1:0.5", "--param", "rules[0].A[1][1]=0:1:0.5", "-o", tmp("r.csv")})
                .code,
            kExitError);
  EXPECT_FALSE(fs::exists(tmp("r.csv")));
}

TEST_F(Cli, FeasibilityThresholdFromEnvironment) {
  // Margin for 0.5 I is 0.5; a threshold above it flips the verdict.
  ::setenv("PFSYN_LP_TOL", "0.75", 1);
  EXPECT_EQ(invoke({"analyze", model("stable_toy.json")}).code, kExitNegative);
  ::setenv("PFSYN_LP_TOL", "1e-9", 1);
  EXPECT_EQ(invoke({"analyze", model("stable_toy.json")}).code, kExitOk);
  ::setenv("PFSYN_LP_TOL", "nope", 1);
  EXPECT_EQ(invoke({"analyze", model("stable_toy.json")}).code, kExitError);
}

TEST_F(Cli, Help) {
  const Outcome o = invoke({"--help"});
  EXPECT_EQ(o.code, kExitOk);
  EXPECT_NE(o.out.find("synthesize"), std::string::npos);
}

}  // namespace
}  // namespace pfsyn::cli
