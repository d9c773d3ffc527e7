#include "orthodeg/cli/config.hpp"
#include "orthodeg/cli/experiments.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace orthodeg;
using namespace orthodeg::cli;

namespace {

std::string validation_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("orthodeg_test_cli_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

int run_tool(const std::string& args) {
  const int raw = std::system((std::string(ORTHODEG_TOOL) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST(Config, MinimalIsValidWithDefaults) {
  const ExperimentConfig c = parse_config("experiment = convergence\n");
  EXPECT_EQ(c.d, 2);
  EXPECT_EQ(c.n, 1);
  ASSERT_EQ(c.a.size(), 1);
  EXPECT_EQ(c.a[0], 1.0);
  EXPECT_TRUE(c.wants("rates"));
  EXPECT_TRUE(c.wants("reflection"));
}

TEST(Config, CommentsListsAndAngles) {
  const ExperimentConfig c = parse_config(
      "# header\nexperiment = closed_forms   # trailing\ndomain.n = 2\nweight.a = 0, 0\nweight.eps = 0,0\n"
      "coefficients.preset = a_theta\ncoefficients.theta = 2*pi/3\nexperiment.parts = u_theta\n");
  EXPECT_NEAR(c.theta, 2.0 * M_PI / 3.0, 1e-15);
  EXPECT_TRUE(c.wants("u_theta"));
  EXPECT_FALSE(c.wants("psi"));
}

TEST(Config, SupersingularExponentNeedsFlag) {
  const std::string msg = validation_message("experiment = inequalities\ndomain.d = 1\nweight.a = -2\n");
  EXPECT_NE(msg.find("a_i ≤ −1"), std::string::npos) << msg;
  EXPECT_NO_THROW(parse_config("experiment = inequalities\ndomain.d = 1\nweight.a = -2\nweight.supersingular = true\n"));
}

TEST(Config, SobolevExponentAboveCapCitesCap) {
  // d = 2, a = 1: D = 3, cap = 6.
  const std::string msg = validation_message("experiment = inequalities\ninequalities.q = 7\n");
  EXPECT_NE(msg.find("2*_a = 6"), std::string::npos) << msg;
  EXPECT_NO_THROW(parse_config("experiment = inequalities\ninequalities.q = 6\n"));
}

TEST(Config, UnknownKeyReportsLine) {
  try {
    parse_config("experiment = convergence\n\n# x\ngrid.cellz = 4\n");
    FAIL() << "expected LineError";
  } catch (const LineError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
}

TEST(Config, MalformedAndDuplicateLines) {
  EXPECT_THROW(parse_config("experiment = convergence\nno equals sign\n"), LineError);
  EXPECT_THROW(parse_config("experiment = convergence\nseed = 1\nseed = 2\n"), LineError);
  EXPECT_THROW(parse_config("experiment = convergence\nseed = abc\n"), LineError);
  EXPECT_THROW(parse_config("experiment = nonsense\n"), ValidationError);
  EXPECT_THROW(parse_config("experiment = convergence\nexperiment.parts = psi\n"), ValidationError);
}

TEST(Config, PresetRestrictions) {
  EXPECT_THROW(parse_config("experiment = convergence\ncoefficients.preset = random\n"), ValidationError);
  EXPECT_THROW(parse_config("experiment = inequalities\ndomain.d = 3\ndomain.n = 1\n"), ValidationError);
  EXPECT_THROW(parse_config("experiment = convergence\ncoefficients.preset = a_theta\n"), ValidationError);
}

TEST(Experiments, LiouvilleIdentityPasses) {
  const ExperimentReport r = run_experiment(parse_config("experiment = liouville\nexperiment.parts = random\n"));
  ASSERT_NE(r.find("identity"), nullptr);
  EXPECT_EQ(r.find("identity")->verdict, CheckVerdict::pass);
  EXPECT_TRUE(r.all_pass());
}

TEST(Experiments, StabilityOneWithAThetaIsExpectedFail) {
  const ExperimentReport r = run_experiment(
      parse_config("experiment = stability1\ndomain.n = 2\nweight.a = 0, 0\nweight.eps = 0, 0\n"
                   "coefficients.preset = a_theta\ndata.preset = u_theta\n"));
  const Check* c = r.find("corner_spread");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->verdict, CheckVerdict::expected_fail);
  EXPECT_TRUE(r.all_pass());
}

TEST(Experiments, ExpectedFailDoesNotCountButFailDoes) {
  ExperimentReport r;
  r.checks.push_back({"x", CheckVerdict::expected_fail, 1, 0, ">", ""});
  EXPECT_TRUE(r.all_pass());
  r.checks.push_back({"y", CheckVerdict::fail, 1, 0, "<=", ""});
  EXPECT_FALSE(r.all_pass());
}

TEST(Experiments, ExponentArithmetic) {
  EXPECT_EQ(exponent_arithmetic_check(7).verdict, CheckVerdict::pass);
}

TEST(Experiments, ReportsAreByteIdenticalAcrossRuns) {
  const std::string cfg = "experiment = convergence\nseed = 5\n";
  const auto d1 = scratch("rep1"), d2 = scratch("rep2");
  write_report(run_experiment(parse_config(cfg)), d1.string());
  write_report(run_experiment(parse_config(cfg), RunOptions{2, false}), d2.string());
  int csvs = 0;
  for (const auto& entry : std::filesystem::directory_iterator(d1)) {
    const auto name = entry.path().filename();
    if (name == "report.json") continue;
    ++csvs;
    EXPECT_EQ(slurp(entry.path()), slurp(d2 / name)) << name;
  }
  EXPECT_GE(csvs, 3);
  const std::string json = slurp(d1 / "report.json");
  EXPECT_NE(json.find("\"artifact_version\": \"1.0.0\""), std::string::npos);
  EXPECT_NE(json.find("\"all_pass\": true"), std::string::npos);
}

TEST(Experiments, InequalityCsvIsSeedDeterministic) {
  const std::string cfg =
      "experiment = inequalities\nexperiment.parts = trace\ninequalities.members = 6\ninequalities.calibration = 8\n";
  const ExperimentReport a = run_experiment(parse_config(cfg)), b = run_experiment(parse_config(cfg), {3, false});
  ASSERT_EQ(a.tables.size(), 1u);
  EXPECT_EQ(a.tables[0].content, b.tables[0].content);
  const ExperimentReport c = run_experiment(parse_config(cfg + "seed = 2\n"));
  EXPECT_NE(a.tables[0].content, c.tables[0].content);
}

TEST(Tool, ExitStatusContract) {
  const auto dir = scratch("tool");
  EXPECT_EQ(run_tool("closed_forms --out " + (dir / "ok").string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "ok" / "report.json"));

  std::ofstream(dir / "fail.cfg") << "experiment = homotopy\nhomotopy.tol_conv = 1e-12\n";
  EXPECT_EQ(run_tool("homotopy --config " + (dir / "fail.cfg").string() + " --out " + (dir / "fail").string()), 1);

  std::ofstream(dir / "bad.cfg") << "experiment = homotopy\nnot.a.key = 1\n";
  EXPECT_EQ(run_tool("homotopy --config " + (dir / "bad.cfg").string() + " --out " + (dir / "bad").string()), 2);
  std::ofstream(dir / "invalid.cfg") << "experiment = inequalities\ninequalities.q = 9\n";
  EXPECT_EQ(run_tool("inequalities --config " + (dir / "invalid.cfg").string() + " --out " + (dir / "x").string()), 2);
  EXPECT_EQ(run_tool("convergence --config " + (dir / "fail.cfg").string()), 2);
  EXPECT_EQ(run_tool("keys"), 0);
}
