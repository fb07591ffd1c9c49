#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "divfree/experiment.hpp"
#include "divfree/density.hpp"

namespace divfree {

namespace {

json convert(const toml::node& node);

json convert_table(const toml::table& t) {
  json out = json::object();
  for (const auto& [key, value] : t) out[std::string(key.str())] = convert(value);
  return out;
}

json convert(const toml::node& node) {
  if (const auto* t = node.as_table()) return convert_table(*t);
  if (const auto* a = node.as_array()) {
    json out = json::array();
    for (const auto& v : *a) out.push_back(convert(v));
    return out;
  }
  if (const auto* v = node.as_string()) return v->get();
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  std::ostringstream os;
  if (const auto* v = node.as_date()) os << *v;
  else if (const auto* v = node.as_time()) os << *v;
  else if (const auto* v = node.as_date_time()) os << *v;
  return os.str();
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json& require(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(join(path, key), "required");
  return obj.at(key);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "must be a number");
  return v.get<double>();
}

long long as_integer(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) return static_cast<long long>(v.get<double>());
  throw ConfigError(path, "must be an integer");
}

double number_or(const json& obj, const std::string& path, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  return as_number(obj.at(key), join(path, key));
}

std::vector<double> number_list(const json& v, const std::string& path, std::optional<std::size_t> size = {}) {
  if (!v.is_array()) throw ConfigError(path, "must be an array of numbers");
  if (size && v.size() != *size)
    throw ConfigError(path, "expected " + std::to_string(*size) + " entries, got " + std::to_string(v.size()));
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<int> integer_list(const json& v, const std::string& path, std::optional<std::size_t> size = {}) {
  if (!v.is_array()) throw ConfigError(path, "must be an array of integers");
  if (size && v.size() != *size)
    throw ConfigError(path, "expected " + std::to_string(*size) + " entries, got " + std::to_string(v.size()));
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(static_cast<int>(as_integer(v[i], path + "[" + std::to_string(i) + "]")));
  return out;
}

std::string kind_of(const json& spec, const std::string& path) {
  if (!spec.is_object()) throw ConfigError(path, "must be a table");
  const auto& k = require(spec, path, "kind");
  if (!k.is_string()) throw ConfigError(join(path, "kind"), "must be a string");
  return k.get<std::string>();
}

void allow_keys(const json& spec, const std::string& path, std::initializer_list<const char*> keys) {
  for (const auto& [key, _] : spec.items()) {
    if (key == "kind") continue;
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
      throw ConfigError(join(path, key), "unknown key");
  }
}

std::vector<Monomial> monomials(const json& terms, const std::string& path, int d) {
  if (!terms.is_array() || terms.empty()) throw ConfigError(path, "must be a non-empty array of tables");
  std::vector<Monomial> out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!terms[i].is_object()) throw ConfigError(p, "must be a table");
    Monomial m;
    m.coefficient = as_number(require(terms[i], p, "coefficient"), join(p, "coefficient"));
    m.powers = integer_list(require(terms[i], p, "powers"), join(p, "powers"), static_cast<std::size_t>(d));
    for (int e : m.powers)
      if (e < 0) throw ConfigError(join(p, "powers"), "must be nonnegative");
    out.push_back(std::move(m));
  }
  return out;
}

std::filesystem::path resolve(const ExperimentConfig& config, const json& spec, const std::string& path) {
  const auto& p = require(spec, path, "path");
  if (!p.is_string()) throw ConfigError(join(path, "path"), "must be a string");
  std::filesystem::path file(p.get<std::string>());
  if (file.is_relative()) file = config.base_dir / file;
  if (!std::filesystem::exists(file)) throw ConfigError(join(path, "path"), "file not found: " + file.string());
  return file;
}

std::vector<double> read_table(const std::filesystem::path& file, const GridSpec& grid, std::size_t columns,
                               const std::string& path) {
  try {
    return read_nodal_csv(file.string(), grid.num_nodes(), columns);
  } catch (const std::exception& e) {
    throw ConfigError(join(path, "path"), e.what());
  }
}

Potential potential_from(const json& spec, const std::string& path, int d, double scale) {
  const std::string kind = kind_of(spec, path);
  if (kind == "trig") {
    allow_keys(spec, path, {"amplitude", "frequencies"});
    return trig_potential(scale * number_or(spec, path, "amplitude", 1.0),
                          integer_list(require(spec, path, "frequencies"), join(path, "frequencies"), d));
  }
  if (kind == "polynomial") {
    allow_keys(spec, path, {"terms"});
    auto terms = monomials(require(spec, path, "terms"), join(path, "terms"), d);
    for (auto& t : terms) t.coefficient *= scale;
    return polynomial_potential(d, std::move(terms));
  }
  throw ConfigError(join(path, "kind"), "potential kind must be trig or polynomial, got \"" + kind + "\"");
}

ScalarField scalar_from(const ExperimentConfig& config, const json& spec, const std::string& path,
                        const GridSpec& grid) {
  const int d = grid.dim;
  const std::string kind = kind_of(spec, path);
  if (kind == "constant") {
    allow_keys(spec, path, {"value"});
    const double v = as_number(require(spec, path, "value"), join(path, "value"));
    return constant_scalar(v);
  }
  if (kind == "polynomial") {
    allow_keys(spec, path, {"terms"});
    return polynomial(monomials(require(spec, path, "terms"), join(path, "terms"), d));
  }
  if (kind == "trig") {
    allow_keys(spec, path, {"amplitude", "frequencies"});
    return trig_product(number_or(spec, path, "amplitude", 1.0),
                        integer_list(require(spec, path, "frequencies"), join(path, "frequencies"), d));
  }
  if (kind == "radial_power") {
    allow_keys(spec, path, {"center", "alpha", "scale"});
    const auto center = number_list(require(spec, path, "center"), join(path, "center"), d);
    const double alpha = as_number(require(spec, path, "alpha"), join(path, "alpha"));
    if (alpha < 0.0) throw ConfigError(join(path, "alpha"), "must be nonnegative");
    return radial_power(center, alpha, number_or(spec, path, "scale", 1.0));
  }
  if (kind == "csv") {
    allow_keys(spec, path, {"path"});
    return tabulated_scalar(grid, read_table(resolve(config, spec, path), grid, 1, path));
  }
  throw ConfigError(join(path, "kind"),
                    "unknown scalar kind \"" + kind + "\" (constant, polynomial, trig, radial_power, csv)");
}

}  // namespace

json toml_to_json(const std::string& text, const std::string& source) {
  try {
    return convert_table(toml::parse(text, source));
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << e.description() << " at line " << e.source().begin.line << ", column " << e.source().begin.column;
    throw ConfigError(source, os.str());
  }
}

GridSpec ExperimentConfig::grid_at(int cells) const {
  GridSpec g = grid;
  g.cells.assign(g.dim, cells);
  return g;
}

json ExperimentConfig::option(const std::string& suite, const std::string& key, json fallback) const {
  if (options.contains(suite) && options.at(suite).contains(key)) return options.at(suite).at(key);
  return fallback;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  if (path.extension() == ".json") {
    try {
      doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string(), e.what());
    }
  } else {
    doc = toml_to_json(buf.str(), path.string());
  }
  return parse_config(doc, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config", "must be a table");
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;

  if (doc.contains("suite") && doc.contains("suites")) throw ConfigError("suites", "give either suite or suites");
  if (doc.contains("suite")) {
    if (!doc["suite"].is_string()) throw ConfigError("suite", "must be a string");
    cfg.suites.push_back(doc["suite"].get<std::string>());
  } else if (doc.contains("suites")) {
    const auto& s = doc["suites"];
    if (!s.is_array() || s.empty()) throw ConfigError("suites", "must be a non-empty array of strings");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_string()) throw ConfigError("suites[" + std::to_string(i) + "]", "must be a string");
      cfg.suites.push_back(s[i].get<std::string>());
    }
  } else {
    throw ConfigError("suite", "required");
  }
  for (std::size_t i = 0; i < cfg.suites.size(); ++i) {
    if (!find_suite(cfg.suites[i]))
      throw ConfigError(doc.contains("suite") ? "suite" : "suites[" + std::to_string(i) + "]",
                        "unknown suite \"" + cfg.suites[i] + "\" (see list-suites)");
  }

  std::set<std::string> known{"suite", "suites", "grid", "fields", "solver", "output", "seed", "parallel"};
  for (const auto& s : suite_registry()) known.insert(s.name);
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw ConfigError(key, "unknown key");
    if (find_suite(key)) {
      if (!value.is_object()) throw ConfigError(key, "must be a table");
      cfg.options[key] = value;
    }
  }
  if (!cfg.options.is_object()) cfg.options = json::object();

  if (doc.contains("seed")) {
    const long long s = as_integer(doc["seed"], "seed");
    if (s < 0) throw ConfigError("seed", "must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (doc.contains("parallel")) {
    cfg.parallel = static_cast<int>(as_integer(doc["parallel"], "parallel"));
    if (cfg.parallel < 1) throw ConfigError("parallel", "must be at least 1");
  }
  if (doc.contains("output")) {
    if (!doc["output"].is_string()) throw ConfigError("output", "must be a string");
    std::filesystem::path out(doc["output"].get<std::string>());
    cfg.output = out.is_relative() ? base_dir / out : out;
  }

  const json& g = require(doc, "", "grid");
  if (!g.is_object()) throw ConfigError("grid", "must be a table");
  allow_keys(g, "grid", {"dim", "cells", "extents", "quadrature_order"});
  cfg.grid.dim = static_cast<int>(g.contains("dim") ? as_integer(g["dim"], "grid.dim") : 3);
  if (cfg.grid.dim < 3) throw ConfigError("grid.dim", "must be at least 3");
  const json& cells = require(g, "grid", "cells");
  if (cells.is_array()) {
    cfg.cells_ladder = integer_list(cells, "grid.cells");
  } else {
    cfg.cells_ladder = {static_cast<int>(as_integer(cells, "grid.cells"))};
  }
  if (cfg.cells_ladder.empty()) throw ConfigError("grid.cells", "must not be empty");
  for (int c : cfg.cells_ladder)
    if (c < 2) throw ConfigError("grid.cells", "every level needs at least 2 cells per axis");
  if (!std::is_sorted(cfg.cells_ladder.begin(), cfg.cells_ladder.end()) ||
      std::adjacent_find(cfg.cells_ladder.begin(), cfg.cells_ladder.end()) != cfg.cells_ladder.end())
    throw ConfigError("grid.cells", "must be strictly increasing");
  cfg.grid.extents.assign(cfg.grid.dim, Interval{0.0, 1.0});
  if (g.contains("extents")) {
    const auto& e = g["extents"];
    if (!e.is_array() || e.size() != static_cast<std::size_t>(cfg.grid.dim))
      throw ConfigError("grid.extents", "expected " + std::to_string(cfg.grid.dim) + " [lo, hi] pairs");
    for (int a = 0; a < cfg.grid.dim; ++a) {
      const std::string p = "grid.extents[" + std::to_string(a) + "]";
      const auto pair = number_list(e[a], p, 2);
      if (!(pair[0] < pair[1])) throw ConfigError(p, "lo must be below hi");
      cfg.grid.extents[a] = Interval{pair[0], pair[1]};
    }
  }
  cfg.grid.quadrature_order =
      static_cast<int>(g.contains("quadrature_order") ? as_integer(g["quadrature_order"], "grid.quadrature_order") : 2);
  if (cfg.grid.quadrature_order < 2) throw ConfigError("grid.quadrature_order", "must be at least 2");
  cfg.grid.cells.assign(cfg.grid.dim, cfg.cells_ladder.back());
  try {
    cfg.grid.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("grid", e.what());
  }

  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    if (!s.is_object()) throw ConfigError("solver", "must be a table");
    allow_keys(s, "solver", {"inner_tol", "outer_tol", "max_iterations", "restart"});
    cfg.solver.inner_tol = number_or(s, "solver", "inner_tol", cfg.solver.inner_tol);
    cfg.solver.outer_tol = number_or(s, "solver", "outer_tol", cfg.solver.outer_tol);
    if (s.contains("max_iterations"))
      cfg.solver.max_iterations = static_cast<int>(as_integer(s["max_iterations"], "solver.max_iterations"));
    if (s.contains("restart")) cfg.solver.restart = static_cast<int>(as_integer(s["restart"], "solver.restart"));
    if (!(cfg.solver.inner_tol > 0.0)) throw ConfigError("solver.inner_tol", "must be positive");
    if (!(cfg.solver.outer_tol > 0.0)) throw ConfigError("solver.outer_tol", "must be positive");
    if (cfg.solver.max_iterations < 1) throw ConfigError("solver.max_iterations", "must be at least 1");
    if (cfg.solver.restart < 1) throw ConfigError("solver.restart", "must be at least 1");
  }

  const json& f = require(doc, "", "fields");
  if (!f.is_object()) throw ConfigError("fields", "must be a table");
  const bool needs_f = std::any_of(cfg.suites.begin(), cfg.suites.end(),
                                   [](const std::string& s) { return s != "manufactured" && s != "exponents"; });
  for (const char* key : {"a", "h", "c"}) require(f, "fields", key);
  if (needs_f) require(f, "fields", "f");
  for (const auto& [key, _] : f.items())
    if (key != "a" && key != "h" && key != "c" && key != "f") throw ConfigError("fields." + key, "unknown key");
  cfg.fields = f;
  build_fields(cfg, cfg.grid);
  return cfg;
}

BuiltFields build_fields(const ExperimentConfig& config, const GridSpec& grid) {
  const int d = grid.dim;
  const json& f = config.fields;
  BuiltFields out;

  const json& a = f.at("a");
  const std::string ak = kind_of(a, "fields.a");
  if (ak == "identity") {
    allow_keys(a, "fields.a", {"scale"});
    out.a_scale = number_or(a, "fields.a", "scale", 1.0);
    if (!(out.a_scale > 0.0)) throw ConfigError("fields.a.scale", "must be positive");
    out.coefficients.a = identity_matrix(d, out.a_scale);
    out.a_constant = true;
  } else if (ak == "constant") {
    allow_keys(a, "fields.a", {"entries"});
    const auto entries = number_list(require(a, "fields.a", "entries"), "fields.a.entries", d * d);
    try {
      out.coefficients.a = constant_matrix(d, entries);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("fields.a.entries", e.what());
    }
    if (!(out.coefficients.a.lambda() > 0.0)) throw ConfigError("fields.a.entries", "not uniformly elliptic");
    out.a_constant = true;
  } else if (ak == "csv") {
    allow_keys(a, "fields.a", {"path", "lambda", "bound"});
    const double lambda = as_number(require(a, "fields.a", "lambda"), "fields.a.lambda");
    const double bound = as_number(require(a, "fields.a", "bound"), "fields.a.bound");
    if (!(lambda > 0.0)) throw ConfigError("fields.a.lambda", "must be positive");
    if (!(bound >= lambda)) throw ConfigError("fields.a.bound", "must be at least lambda");
    out.coefficients.a = tabulated_matrix(
        grid, read_table(resolve(config, a, "fields.a"), grid, d * d, "fields.a"), lambda, bound);
    if (!sample_ellipticity(out.coefficients.a, grid).consistent)
      throw ConfigError("fields.a", "declared lambda/bound violated by the tabulated values");
  } else {
    throw ConfigError("fields.a.kind", "unknown matrix kind \"" + ak + "\" (identity, constant, csv)");
  }

  const json& h = f.at("h");
  const std::string hk = kind_of(h, "fields.h");
  if (hk == "zero") {
    allow_keys(h, "fields.h", {});
    std::vector<double> z(d, 0.0);
    out.coefficients.h = constant_vector(z);
    out.drift_constant = true;
    out.drift_potential = polynomial_potential(d, {Monomial{0.0, std::vector<int>(d, 0)}});
  } else if (hk == "constant") {
    allow_keys(h, "fields.h", {"value"});
    const auto v = number_list(require(h, "fields.h", "value"), "fields.h.value", d);
    out.coefficients.h = constant_vector(v);
    out.drift_constant = true;
    std::vector<Monomial> terms;
    for (int i = 0; i < d; ++i) {
      std::vector<int> p(d, 0);
      p[i] = 1;
      terms.push_back({v[i], p});
    }
    out.drift_potential = polynomial_potential(d, terms);
  } else if (hk == "gradient_potential") {
    allow_keys(h, "fields.h", {"potential"});
    auto pot = potential_from(require(h, "fields.h", "potential"), "fields.h.potential", d, 1.0);
    out.coefficients.h = gradient_potential(pot);
    out.drift_potential = std::move(pot);
  } else if (hk == "csv") {
    allow_keys(h, "fields.h", {"path"});
    out.coefficients.h = tabulated_vector(grid, read_table(resolve(config, h, "fields.h"), grid, d, "fields.h"));
  } else {
    throw ConfigError("fields.h.kind", "unknown vector kind \"" + hk + "\" (zero, constant, gradient_potential, csv)");
  }

  out.coefficients.c = scalar_from(config, f.at("c"), "fields.c", grid);
  if (f.contains("f")) out.coefficients.f = scalar_from(config, f.at("f"), "fields.f", grid);
  else out.coefficients.f = constant_scalar(0.0);
  return out;
}

}  // namespace divfree
