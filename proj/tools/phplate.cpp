// Scenario runner for the port-Hamiltonian beam and plate models.
//
//   phplate run <config> [--strict] [--out DIR]
//   phplate eigen <config> [--strict] [--out DIR]
//   phplate verify [--strict] [--out DIR] [--seed N]

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "phplate/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Port-Hamiltonian beam/plate discretization runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  bool strict = false;
  unsigned seed = 1;

  auto* run = app.add_subcommand("run", "run the analysis described by a config file");
  run->add_option("config", config_path, "scenario file")->required();
  auto* eigen = app.add_subcommand("eigen", "modal analysis of the model in a config file");
  eigen->add_option("config", config_path, "scenario file")->required();
  auto* verify = app.add_subcommand("verify", "structural checks on analytic fields and small systems");
  verify->add_option("--seed", seed, "random seed");
  for (auto* sub : {run, eigen, verify}) {
    sub->add_flag("--strict", strict, "exit with status 4 on any invariant violation");
    sub->add_option("--out", out_dir, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : phplate::exit_config;
  }

  phplate::ScenarioConfig config;
  if (verify->parsed()) {
    config.analysis = phplate::AnalysisKind::verify;
    config.source = "<verify>";
    config.seed = seed;
    config.output_dir = "phplate_verify";
  } else {
    try {
      config = phplate::load_scenario(config_path);
    } catch (const phplate::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return phplate::exit_config;
    }
    if (eigen->parsed()) config.analysis = phplate::AnalysisKind::eigen;
  }
  const std::filesystem::path dir = out_dir.empty() ? config.output_dir : out_dir;
  const int code = phplate::run_scenario(config, dir, strict, std::cout, std::cerr);
  if (code == 0) std::cout << "artifacts written to " << dir.string() << "\n";
  return code;
}
