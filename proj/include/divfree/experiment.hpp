#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "divfree/report.hpp"
#include "divfree/solver.hpp"

namespace divfree {

/// Invalid configuration; what() is "<field path>: <problem>".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& problem)
      : std::runtime_error(field + ": " + problem), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::vector<std::string> suites;
  GridSpec grid;                // finest level of the ladder
  std::vector<int> cells_ladder;  // cells per axis, ascending
  json fields;                  // validated specs of a, h, c, f
  json options;                 // per-suite tables, keyed by suite name
  SolverOptions solver;
  std::optional<std::filesystem::path> output;
  std::filesystem::path base_dir;  // relative CSV paths resolve here
  std::uint64_t seed = 0;
  int parallel = 1;

  /// The grid with `cells` per axis on the configured box.
  GridSpec grid_at(int cells) const;
  /// Suite option with a default.
  json option(const std::string& suite, const std::string& key, json fallback) const;
};

/// TOML, or JSON when the file extension is .json.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const json& document, const std::filesystem::path& base_dir = ".");
/// TOML text to the equivalent JSON document.
json toml_to_json(const std::string& text, const std::string& source = "config");

/// Coefficient fields built from a validated config on `grid`, plus the
/// drift potential V with H = grad V when it is known in closed form.
struct BuiltFields {
  Coefficients coefficients;
  std::optional<Potential> drift_potential;
  bool drift_constant = false;
  bool a_constant = false;
  double a_scale = 0.0;  // s when A = s I, else 0
};
BuiltFields build_fields(const ExperimentConfig& config, const GridSpec& grid);

struct SuiteInfo {
  std::string name;
  std::string anchor;
  std::string description;
  std::function<EstimateReport(const ExperimentConfig&)> run;
};

const std::vector<SuiteInfo>& suite_registry();
const SuiteInfo* find_suite(const std::string& name);
/// One line per suite: "name (anchor)  description".
std::string list_suites_text();

struct RunResult {
  std::vector<EstimateReport> reports;
  std::filesystem::path output;
  bool passed = true;
  std::vector<std::string> failures;  // "suite/check"
};

/// Runs every configured suite and writes report.json, tables/*.csv and
/// summary.txt under the output directory.
RunResult run_experiment(const ExperimentConfig& config);

}  // namespace divfree
