#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "divfree/density.hpp"
#include "divfree/experiment.hpp"
#include "divfree/verify.hpp"

namespace py = pybind11;
using namespace divfree;

namespace {

ExperimentConfig config_from(const std::string& text, const std::string& base_dir) {
  return parse_config(json::parse(text), base_dir);
}

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

GridSpec level_grid(const ExperimentConfig& cfg, std::optional<int> cells) {
  return cells ? cfg.grid_at(*cells) : cfg.grid;
}

py::tuple node_shape(const GridSpec& g) {
  py::tuple t(g.dim);
  for (int a = 0; a < g.dim; ++a) t[a] = g.nodes_along(a);
  return t;
}

py::dict solve(const std::string& text, const std::string& base_dir, const std::string& method,
               std::optional<int> cells) {
  if (method != "direct" && method != "fredholm" && method != "lax_milgram")
    throw py::value_error("method must be direct, fredholm or lax_milgram");
  const auto cfg = config_from(text, base_dir);
  const GridSpec g = level_grid(cfg, cells);
  const auto fields = build_fields(cfg, g);
  const auto space = build_space(g);
  SolveReport r;
  DiscreteProblem p;
  {
    py::gil_scoped_release release;
    if (method == "direct") {
      p = make_problem(space, fields.coefficients, 0.0);
      r = direct_solve(p, cfg.solver);
    } else if (method == "fredholm") {
      p = make_problem(space, fields.coefficients);
      r = fredholm_solve(p, p.load, cfg.solver);
    } else {
      p = make_problem(space, fields.coefficients, 0.0);
      r = lax_milgram_solve(p, p.load, cfg.solver);
    }
  }
  py::dict d;
  d["nodal"] = to_array(space->to_nodal(r.solution.values()));
  d["shape"] = node_shape(g);
  d["method"] = r.method;
  d["iterations"] = r.iterations;
  d["residual"] = r.residual_norm;
  d["weak_residual"] = r.weak_residual;
  d["gamma"] = p.gamma;
  d["l2"] = norm(r.solution, NormKind::l2);
  d["h1"] = norm(r.solution, NormKind::h1);
  d["linf"] = norm(r.solution, NormKind::linf);
  return d;
}

py::dict density(const std::string& text, const std::string& base_dir, std::optional<int> cells) {
  const auto cfg = config_from(text, base_dir);
  const GridSpec g = level_grid(cfg, cells);
  const auto fields = build_fields(cfg, g);
  InvariantDensity rho;
  DivergenceResidual res;
  {
    py::gil_scoped_release release;
    rho = compute_rho(fields.coefficients.a, fields.coefficients.h, g);
    res = divergence_residual(rho, fields.coefficients.a, fields.coefficients.h);
  }
  py::dict d;
  d["nodal"] = to_array(rho.nodal);
  d["shape"] = node_shape(g);
  d["x1"] = rho.x1;
  d["min"] = rho.min;
  d["max"] = rho.max;
  d["harnack_ratio"] = rho.harnack_ratio;
  d["divergence_residual"] = res.max_normalized;
  return d;
}

py::dict run(const std::string& text, const std::string& base_dir, const std::string& out, std::optional<int> parallel,
             std::optional<double> tol) {
  auto cfg = config_from(text, base_dir);
  cfg.output = out;
  if (parallel) cfg.parallel = *parallel;
  if (tol) cfg.solver.outer_tol = *tol;
  RunResult r;
  {
    py::gil_scoped_release release;
    r = run_experiment(cfg);
  }
  py::dict d;
  d["passed"] = r.passed;
  d["failures"] = r.failures;
  d["output"] = r.output.string();
  py::list suites;
  for (const auto& rep : r.reports) suites.append(py::make_tuple(rep.suite, rep.anchor, rep.hard_ok()));
  d["suites"] = suites;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Q1 finite element solver and estimate checks for elliptic problems with rough zero-order terms";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("toml_to_json", [](const std::string& text) { return toml_to_json(text).dump(); }, py::arg("text"));
  m.def("validate", [](const std::string& text, const std::string& base_dir) { config_from(text, base_dir); },
        py::arg("config_json"), py::arg("base_dir") = ".");
  m.def("solve", &solve, py::arg("config_json"), py::arg("base_dir") = ".", py::arg("method") = "direct",
        py::arg("cells") = py::none());
  m.def("compute_rho", &density, py::arg("config_json"), py::arg("base_dir") = ".", py::arg("cells") = py::none());
  m.def("run", &run, py::arg("config_json"), py::arg("base_dir"), py::arg("out"), py::arg("parallel") = py::none(),
        py::arg("tol") = py::none());

  m.def("list_suites", [] {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& s : suite_registry()) out.emplace_back(s.name, s.anchor, s.description);
    return out;
  });

  m.def(
      "exponent_set",
      [](int d, double r, double p_hat) {
        const auto e = exponent_set(d, r, p_hat);
        py::dict out;
        out["d"] = e.d;
        out["r"] = e.r;
        out["p_hat"] = e.p_hat;
        out["k"] = e.k;
        out["theta"] = e.theta;
        out["q_theta"] = e.q_theta;
        out["p_theta"] = e.p_theta;
        out["s"] = e.s;
        out["q0"] = e.q0;
        out["p0"] = e.p0;
        out["p1"] = e.p1;
        py::dict ids;
        for (const auto& id : e.identities()) ids[py::str(id.name)] = id.defect;
        out["identities"] = ids;
        return out;
      },
      py::arg("d"), py::arg("r"), py::arg("p_hat"));

  m.def("sobolev_factor", &sobolev_factor, py::arg("d"));
}
