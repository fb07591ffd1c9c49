#include <iostream>

#include <CLI11.hpp>

#include "divfree/experiment.hpp"
#include "divfree/log.hpp"

int main(int argc, char** argv) {
  using namespace divfree;
  CLI::App app{"Elliptic solver and estimate checks for rough zero-order coefficients"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int parallel = 0;
  double tol = 0.0;
  auto* run = app.add_subcommand("run", "run the suites of a TOML (or .json) config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--parallel", parallel, "concurrent ladder levels")->check(CLI::PositiveNumber);
  run->add_option("--tol", tol, "outer solver tolerance")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list-suites", "print the suite registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    std::cout << list_suites_text();
    return 0;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  if (!out_dir.empty()) cfg.output = out_dir;
  if (parallel > 0) cfg.parallel = parallel;
  if (tol > 0.0) cfg.solver.outer_tol = tol;

  try {
    const auto result = run_experiment(cfg);
    std::cout << "wrote " << (result.output / "report.json").string() << '\n';
    if (!result.passed) {
      for (const auto& f : result.failures) std::cerr << "failed: " << f << '\n';
      return 1;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
