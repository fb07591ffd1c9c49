#include "divfree/experiment.hpp"

#include <fstream>
#include <sstream>

#include "divfree/log.hpp"
#include "suites.hpp"

namespace divfree {

const std::vector<SuiteInfo>& suite_registry() {
  static const std::vector<SuiteInfo> registry{
      {"manufactured", "Eq. (2)", "Galerkin convergence against a manufactured sine solution", suites::manufactured},
      {"well_posedness", "Theorem 3.4", "constants K, N, gamma; Fredholm pipeline against the direct solve",
       suites::well_posedness},
      {"rough_c_ladder", "Theorem 4.2", "truncation ladder c ^ n: energy bound, H1 differences, L-inf band",
       suites::rough_c_ladder},
      {"duality", "Theorem 4.2 uniqueness", "adjoint probe integrals of the difference of two solves",
       suites::duality},
      {"divfree", "Theorem 4.6", "invariant density: positivity, Harnack ratio, divergence-free residual",
       suites::divfree},
      {"transformation", "Theorem 4.7", "equivalence gap between original and transformed problems over the grid ladder",
       suites::transformation},
      {"interpolation", "Section 5", "calibrated endpoint constants and the interpolated inequality on a ladder",
       suites::interpolation},
      {"exponents", "Section 5", "exponent identities over the (d, r, p_hat) sweep", suites::exponents},
      {"max_principle", "Prop 3.2", "discrete weak maximum principle diagnostic", suites::max_principle},
  };
  return registry;
}

const SuiteInfo* find_suite(const std::string& name) {
  for (const auto& s : suite_registry())
    if (s.name == name) return &s;
  return nullptr;
}

std::string list_suites_text() {
  std::ostringstream os;
  for (const auto& s : suite_registry()) {
    const std::string head = s.name + " (" + s.anchor + ")";
    os << head << std::string(head.size() < 36 ? 36 - head.size() : 1, ' ') << s.description << '\n';
  }
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json config_json(const ExperimentConfig& cfg) {
  json extents = json::array();
  for (const auto& e : cfg.grid.extents) extents.push_back({e.lo, e.hi});
  return json{{"suites", cfg.suites},
              {"grid",
               {{"dim", cfg.grid.dim},
                {"extents", extents},
                {"cells", cfg.cells_ladder},
                {"quadrature_order", cfg.grid.quadrature_order}}},
              {"fields", cfg.fields},
              {"solver",
               {{"inner_tol", cfg.solver.inner_tol},
                {"outer_tol", cfg.solver.outer_tol},
                {"max_iterations", cfg.solver.max_iterations},
                {"restart", cfg.solver.restart}}},
              {"options", cfg.options},
              {"seed", cfg.seed}};
}

std::string summary_line(const std::string& suite, const Verdict& v) {
  std::string line = suite + "/" + v.name + ": " + v.status_text();
  if (v.status != VerdictStatus::not_applicable)
    line += " (lhs " + format_double(v.lhs) + ", rhs " + format_double(v.rhs) + ", margin " + format_double(v.margin) +
            ")";
  if (!v.hard) line += " [diagnostic]";
  if (!v.note.empty()) line += " -- " + v.note;
  return line;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  RunResult result;
  result.output = cfg.output.value_or(std::filesystem::path("divfree-out"));
  std::filesystem::create_directories(result.output / "tables");

  for (const auto& name : cfg.suites) {
    const SuiteInfo* info = find_suite(name);
    if (!info) throw ConfigError("suite", "unknown suite \"" + name + "\"");
    log_info("suite " + name + " (" + info->anchor + ")");
    EstimateReport report;
    try {
      report = info->run(cfg);
    } catch (const ConfigError&) {
      throw;
    } catch (const NumericalError& e) {
      report = EstimateReport{};
      Verdict v = make_verdict(e.kind(), 1.0, 0.0, 0.0);
      v.note = e.what();
      report.add(v);
      log_warn(name + ": " + e.what());
    }
    report.suite = info->name;
    report.anchor = info->anchor;
    for (const auto& f : report.failures()) result.failures.push_back(name + "/" + f);
    result.reports.push_back(std::move(report));
  }
  result.passed = result.failures.empty();

  json reports = json::array();
  std::string summary;
  for (const auto& r : result.reports) {
    reports.push_back(r.to_json());
    write_file(result.output / "tables" / (r.suite + "_verdicts.csv"), r.verdict_csv());
    for (const auto& t : r.tables) write_file(result.output / "tables" / (r.suite + "_" + t.name + ".csv"), t.csv());
    summary += "# " + r.suite + " (" + r.anchor + ")\n";
    for (const auto& v : r.verdicts) summary += summary_line(r.suite, v) + '\n';
    for (const auto& n : r.notes) summary += r.suite + " note: " + n + '\n';
  }
  if (result.passed) {
    summary += "PASS\n";
  } else {
    summary += "FAIL:";
    for (const auto& f : result.failures) summary += " " + f;
    summary += '\n';
  }
  json doc{{"config", config_json(cfg)}, {"reports", reports}, {"passed", result.passed}, {"failures", result.failures}};
  write_file(result.output / "report.json", doc.dump(2) + '\n');
  write_file(result.output / "summary.txt", summary);
  return result;
}

}  // namespace divfree
