#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "phplate/scenario.hpp"

using namespace phplate;
namespace fs = std::filesystem;

namespace {

ScenarioConfig parse_text(const std::string& text) {
  std::istringstream in(text);
  IniDocument doc = IniDocument::parse(in, "test.ini");
  return parse_scenario(doc);
}

int config_error_line(const std::string& text) {
  try {
    parse_text(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("phplate_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "scenario.ini";
  std::ofstream(p) << text;
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PHPLATE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* ss_plate = R"(# simply supported square
[model]
kind = plate
variant = force
[geometry]
a = 1
b = 1
[mesh]
nx = 4
ny = 4
[material]
surface_density = 1
rigidity = 1
poisson = 0.3
[boundary]
bottom = simply_supported
right = simply_supported
top = simply_supported
left = simply_supported
[analysis]
kind = eigen
modes = 3
)";

}  // namespace

TEST(IniDocument, ParsesSectionsAndComments) {
  std::istringstream in("; header\n[a]\nx = 1 # one\n y=hello world \n[b]\nz=2.5\n");
  IniDocument doc = IniDocument::parse(in);
  EXPECT_EQ(doc.get_int("a", "x", 0), 1);
  EXPECT_EQ(doc.get_string("a", "y", ""), "hello world");
  EXPECT_DOUBLE_EQ(doc.require_double("b", "z"), 2.5);
  EXPECT_EQ(doc.get_int("b", "missing", 7), 7);
  EXPECT_NO_THROW(doc.finish());
}

TEST(IniDocument, ErrorsCarryLineNumbers) {
  auto line = [](const std::string& text) {
    std::istringstream in(text);
    try {
      IniDocument::parse(in, "f.ini");
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line("x = 1\n"), 1);
  EXPECT_EQ(line("[a]\nx = 1\n\nx = 2\n"), 4);
  EXPECT_EQ(line("[a]\njunk\n"), 2);
  EXPECT_EQ(line("[a\n"), 1);
  std::istringstream in("[a]\nx = abc\ny = 3\n");
  IniDocument doc = IniDocument::parse(in, "f.ini");
  try {
    doc.get_double("a", "x", 0.0);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()), "f.ini:2: [a.x]: expected a number, got 'abc'");
  }
  try {
    doc.finish();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.field(), "a.y");
  }
  EXPECT_THROW(IniDocument::load("/nonexistent/phplate.ini"), ConfigError);
}

TEST(ParseScenario, DefaultsAndValues) {
  const ScenarioConfig c = parse_text(ss_plate);
  EXPECT_TRUE(c.plate);
  EXPECT_EQ(c.nx, 4);
  EXPECT_EQ(c.modes, 3);
  EXPECT_NEAR(bending_rigidity(c.material), 1.0, 1e-14);
  EXPECT_EQ(c.sides[0], BoundaryCondition::simply_supported);
  EXPECT_EQ(c.curvature, CurvatureSpace::dq3);
  EXPECT_EQ(c.analysis, AnalysisKind::eigen);
}

TEST(ParseScenario, ValidationErrorsPointAtTheKey) {
  EXPECT_EQ(config_error_line("[model]\nkind = shell\n"), 2);
  EXPECT_EQ(config_error_line("[geometry]\na = -1\n"), 2);
  EXPECT_EQ(config_error_line("[mesh]\nnx = 0\n"), 2);
  EXPECT_EQ(config_error_line("[material]\npoisson = 0.7\n"), 0);
  EXPECT_EQ(config_error_line("[boundary]\nbottom = glued\n"), 2);
  EXPECT_EQ(config_error_line("[model]\nvariant = kinematic\n[mesh]\ncurvature_space = q2\n"), 4);
  EXPECT_EQ(config_error_line("[boundary]\nright = input_signal\n[input]\nside = left\nkind = moment\n"), 4);
  EXPECT_EQ(config_error_line("[boundary]\nright = input_signal\n[input]\nside = right\nkind = torque\n"), 5);
  EXPECT_EQ(config_error_line("[analysis]\nkind = simulate\n[integrator]\ndt = 0\n"), 4);
  EXPECT_EQ(config_error_line("[analysis]\nkind = eigen\ncolour = red\n"), 3);
  EXPECT_EQ(config_error_line("[material]\nrigidity = 1\nthickness = 2\n"), 2);
  EXPECT_EQ(config_error_line("[damping]\nr = 1\n[analysis]\nkind = simulate\n[integrator]\nscheme = leapfrog\n"), 6);
}

TEST(BuildModel, InputPatternOnDeclaredSide) {
  ScenarioConfig c = parse_text(
      "[mesh]\nnx = 2\nny = 2\n[boundary]\nbottom = clamped\nright = input_signal\ntop = clamped\nleft = clamped\n"
      "[input]\nside = right\nkind = moment\namplitude = 2\nfrequency = 3\n");
  const BuiltModel m = build_model(c);
  EXPECT_EQ(m.skew_full, 0.0);
  EXPECT_EQ(m.skew_constrained, 0.0);
  EXPECT_GT(m.signal_pattern.lpNorm<Eigen::Infinity>(), 0.0);
  for (int i = 0; i < m.signal_pattern.size(); ++i)
    if (m.signal_pattern[i] != 0.0) {
      EXPECT_EQ(m.signal_pattern[i], 2.0);
      EXPECT_TRUE(m.system().input_labels()[i].starts_with("moment:right:"));
    }
  const Eigen::VectorXd u = m.input()(0.25 / 3.0);
  EXPECT_NEAR((u - m.signal_pattern).norm(), 0.0, 1e-14);
}

TEST(OracleFrequencies, BeamAndPlateTables) {
  ScenarioConfig c = parse_text("[model]\nkind = beam\n[boundary]\nleft = clamped\nright = free\n");
  const auto w = oracle_frequencies(c, 2);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_NEAR(w[0], 1.8751040687 * 1.8751040687, 1e-8);
  c = parse_text(ss_plate);
  const auto p = oracle_frequencies(c, 3);
  EXPECT_NEAR(p[0], 2 * std::numbers::pi * std::numbers::pi, 1e-12);
  EXPECT_NEAR(p[1], 5 * std::numbers::pi * std::numbers::pi, 1e-12);
  EXPECT_NEAR(p[2], 5 * std::numbers::pi * std::numbers::pi, 1e-12);
  c.sides[0] = BoundaryCondition::clamped;
  EXPECT_TRUE(oracle_frequencies(c, 3).empty());
}

TEST(Cli, EigenRunWritesReportAndDeterministicArtifacts) {
  const fs::path dir = scratch("eigen");
  const fs::path cfg = write_config(dir, ss_plate);
  ASSERT_EQ(run_cli("eigen " + cfg.string() + " --strict --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli("run " + cfg.string() + " --strict --out " + (dir / "b").string()), 0);
  for (const char* f : {"eigen_report.csv", "modes.txt"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  const auto report = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
  EXPECT_TRUE(report["passed"].get<bool>());
  EXPECT_LT(report["modes"][0]["relative_error"].get<double>(), 1e-3);
  const std::string modes = slurp(dir / "a" / "modes.txt");
  EXPECT_EQ(modes.rfind("STRUCTURED_GRID\ndimensions 5 5\nfields x y mode1 mode2 mode3\n", 0), 0u);
}

TEST(Cli, SimulationWritesTraceAndSnapshots) {
  const fs::path dir = scratch("simulate");
  const fs::path cfg = write_config(dir, std::string(ss_plate) +
                                            "[integrator]\ndt = 0.001\nsteps = 20\nsnapshot_every = 10\n"
                                            "[initial]\nkind = random\n");
  std::string text = slurp(cfg);
  text.replace(text.find("kind = eigen"), 12, "kind = simulate");
  std::ofstream(cfg) << text;
  ASSERT_EQ(run_cli("run " + cfg.string() + " --strict --out " + (dir / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "trace.csv"));
  for (const char* f : {"field_000000.txt", "field_000010.txt", "field_000020.txt"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  EXPECT_LT(report["max_relative_drift"].get<double>(), 1e-12);
}

TEST(Cli, VerifySubcommand) {
  const fs::path dir = scratch("verify");
  EXPECT_EQ(run_cli("verify --strict --seed 3 --out " + dir.string()), 0);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_TRUE(report["passed"].get<bool>());
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("codes");
  // 2: malformed config or unknown option
  EXPECT_EQ(run_cli("run " + write_config(dir, "[mesh]\nnx = many\n").string() + " --out " + (dir / "o").string()), 2);
  EXPECT_EQ(run_cli("run /nonexistent.ini"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  // 3: free plate has no static equilibrium under gravity
  EXPECT_EQ(run_cli("run " + write_config(dir, "[mesh]\nnx = 2\nny = 2\n[load]\ngravity = 9.81\n[analysis]\nkind = static\n").string() +
                    " --out " + (dir / "o").string()),
            3);
  // 4: leapfrog above its stability limit diverges; only --strict turns it into an error
  const std::string unstable = write_config(dir, std::string(ss_plate) +
                                                     "[integrator]\nscheme = leapfrog\ndt = 1\nsteps = 50\n"
                                                     "[initial]\nkind = random\n")
                                   .string();
  std::string text = slurp(unstable);
  text.replace(text.find("kind = eigen"), 12, "kind = simulate");
  std::ofstream(unstable) << text;
  EXPECT_EQ(run_cli("run " + unstable + " --out " + (dir / "o").string()), 0);
  EXPECT_EQ(run_cli("run " + unstable + " --strict --out " + (dir / "o").string()), 4);
}
