#include "divfree/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace divfree {

std::vector<ExponentSet::Identity> ExponentSet::identities() const {
  return {
      {"1/q_theta = (1-theta)/q0", std::abs(1.0 / q_theta - (1.0 - theta) / q0)},
      {"1/p_theta = (1-theta)/p0 + theta/p1", std::abs(1.0 / p_theta - ((1.0 - theta) / p0 + theta / p1))},
      {"1/q_theta + 1/s = 1", std::abs(1.0 / q_theta + 1.0 / s - 1.0)},
      {"k >= 1, k = 1 iff r = 2", (k >= 1.0 - 1e-15 && ((std::abs(k - 1.0) <= 1e-12) == (std::abs(r - 2.0) <= 1e-12)))
                                      ? 0.0
                                      : 1.0},
  };
}

ExponentSet exponent_set(int d, double r, double p_hat) {
  if (d < 3) throw std::invalid_argument("exponent_set: d must be >= 3");
  if (!(r >= 2.0 && r <= d)) throw std::invalid_argument("exponent_set: r must lie in [2, d]");
  if (!(p_hat > d) || !std::isfinite(p_hat)) throw std::invalid_argument("exponent_set: p_hat must lie in (d, inf)");
  ExponentSet e;
  e.d = d;
  e.r = r;
  e.p_hat = p_hat;
  e.k = r * (p_hat - 2.0) / (2.0 * (p_hat - r));
  e.theta = 1.0 - 1.0 / e.k;
  e.q_theta = 2.0 * d * e.k / (d - 2.0);
  e.p_theta = r * d / (d + r);
  e.s = 2.0 * d * e.k / (2.0 * d * e.k - d + 2.0);
  e.q0 = 2.0 * d / (d - 2.0);
  e.p0 = 2.0 * d / (d + 2.0);
  e.p1 = p_hat * d / (d + p_hat);
  for (const auto& id : e.identities()) {
    if (id.defect > 1e-12) {
      std::ostringstream os;
      os << "exponent identity " << id.name << " fails by " << id.defect;
      throw NumericalError("exponent_identity", os.str());
    }
  }
  return e;
}

std::string Verdict::status_text() const {
  switch (status) {
    case VerdictStatus::holds:
      return "holds";
    case VerdictStatus::violated:
      return "violated";
    default:
      return "not_applicable";
  }
}

Verdict make_verdict(std::string name, double lhs, double rhs, double slack) {
  Verdict v;
  v.name = std::move(name);
  v.lhs = lhs;
  v.rhs = rhs;
  v.slack = slack;
  v.margin = rhs == 0.0 ? (lhs == 0.0 ? 0.0 : kInfinity) : lhs / rhs;
  v.status = lhs <= rhs * (1.0 + slack) ? VerdictStatus::holds : VerdictStatus::violated;
  return v;
}

Verdict check_energy(const DiscreteFunction& u, const ScalarField& f, double lambda, int d) {
  const double lhs = norm(u, NormKind::h1_semi);
  const double fn = lp_norm(f, 2.0 * d / (d + 2.0), u.space().grid()).value;
  return make_verdict("energy", lhs, sobolev_factor(d) / lambda * fn);
}

Verdict check_energy(const DiscreteFunction& u, double f_norm, double lambda, int d) {
  return make_verdict("energy", norm(u, NormKind::h1_semi), sobolev_factor(d) / lambda * f_norm);
}

double linf_ratio(const DiscreteFunction& u, const ScalarField& f, double p_hat) {
  const int d = u.space().dim();
  const double fn = lp_norm(f, p_hat * d / (d + p_hat), u.space().grid()).value;
  const double un = norm(u, NormKind::linf);
  return fn == 0.0 ? 0.0 : un / fn;
}

Verdict check_linf_band(const std::vector<double>& ratios, double band) {
  if (ratios.empty()) {
    Verdict v;
    v.name = "linf_band";
    v.status = VerdictStatus::not_applicable;
    return v;
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  Verdict v = make_verdict("linf_band", sorted.back(), band * median, 0.0);
  std::ostringstream os;
  os << "min " << sorted.front() << ", median " << median << ", max " << sorted.back();
  v.note = os.str();
  return v;
}

Verdict check_interpolation(const DiscreteFunction& u, const ScalarField& f, const ExponentSet& e,
                            const EffectiveConstants& c) {
  if (!c.calibrated) throw std::logic_error("calibrate first");
  const double lhs = norm(u, NormKind::lq, e.q_theta);
  const double fn = lp_norm(f, e.p_theta, u.space().grid()).value;
  const double constant = std::pow(c.c1, 1.0 / e.k) * std::pow(c.c2, 1.0 - 1.0 / e.k);
  return make_verdict("interpolation", lhs, constant * fn);
}

std::vector<std::pair<std::string, ScalarField>> calibration_family(const GridSpec& grid) {
  const int d = grid.dim;
  std::vector<double> lo(d), len(d);
  for (int a = 0; a < d; ++a) {
    lo[a] = grid.extents[a].lo;
    len[a] = grid.extents[a].length();
  }
  std::vector<std::pair<std::string, ScalarField>> out;
  out.emplace_back("constant", constant_scalar(1.0));
  for (int k : {1, 2, 3}) {
    out.emplace_back("sine" + std::to_string(k), ScalarField([lo, len, k](std::span<const double> x) {
                       double v = 1.0;
                       for (std::size_t a = 0; a < lo.size(); ++a) {
                         v *= std::sin(k * std::numbers::pi * (x[a] - lo[a]) / len[a]);
                       }
                       return v;
                     }));
  }
  const std::vector<std::vector<double>> centers = {std::vector<double>(d, 0.5), std::vector<double>(d, 0.25),
                                                    [d] {
                                                      std::vector<double> c(d, 0.5);
                                                      c[0] = 0.8;
                                                      return c;
                                                    }()};
  for (std::size_t i = 0; i < centers.size(); ++i) {
    std::vector<double> c(d);
    for (int a = 0; a < d; ++a) c[a] = lo[a] + centers[i][a] * len[a];
    const double width = 0.1 * *std::min_element(len.begin(), len.end());
    out.emplace_back("bump" + std::to_string(i), ScalarField([c, width](std::span<const double> x) {
                       double r2 = 0.0;
                       for (std::size_t a = 0; a < c.size(); ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
                       return std::exp(-r2 / (width * width));
                     }));
  }
  return out;
}

Calibration calibrate(const Coefficients& cf, const GridSpec& grid, const std::vector<double>& ladder,
                      const ExponentSet& e, const std::vector<std::pair<std::string, ScalarField>>& family,
                      const SolverOptions& options) {
  Calibration out;
  const auto space = build_space(grid);
  std::vector<Vector> loads;
  std::vector<double> f_p0, f_p1;
  for (const auto& [name, g] : family) {
    loads.push_back(assemble_load(*space, g));
    f_p0.push_back(lp_norm(g, e.p0, grid).value);
    f_p1.push_back(lp_norm(g, e.p1, grid).value);
  }
  for (double n : ladder) {
    Coefficients level = cf;
    level.c = truncate(cf.c, n);
    const DiscreteProblem p = make_problem(space, level, 0.0);
    const DirectSolver solver(p, options);
    for (std::size_t i = 0; i < family.size(); ++i) {
      const auto u = solver.solve(loads[i]).solution;
      CalibrationSample s;
      s.data = family[i].first;
      s.level = n;
      s.ratio_c1 = norm(u, NormKind::lq, e.q0) / f_p0[i];
      s.ratio_c2 = norm(u, NormKind::linf) / f_p1[i];
      out.constants.c1 = std::max(out.constants.c1, s.ratio_c1);
      out.constants.c2 = std::max(out.constants.c2, s.ratio_c2);
      out.samples.push_back(s);
    }
  }
  out.constants.samples = static_cast<int>(out.samples.size());
  out.constants.calibrated = !out.samples.empty();
  return out;
}

MaxPrincipleResult max_principle_diagnostic(const DiscreteProblem& problem, const ScalarField& f,
                                            const DiscreteFunction& u) {
  MaxPrincipleResult r;
  const auto& m = problem.op.matrix;
  // entries that vanish in exact arithmetic (Q1 face couplings) carry round-off
  for (Eigen::Index i = 0; i < m.outerSize(); ++i) {
    const double tol = 1e-12 * std::abs(m.coeff(i, i));
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) {
      if (it.row() != it.col() && it.value() > tol) ++r.positive_offdiagonals;
    }
  }
  const GridSpec& grid = problem.space->grid();
  const CellRule rule = make_cell_rule(grid, grid.quadrature_order);
  std::vector<double> x(grid.dim);
  r.data_nonpositive = true;
  for (std::size_t c = 0; c < grid.num_cells() && r.data_nonpositive; ++c) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      quadrature_point(grid, rule, c, q, x);
      if (f(x) > 0.0) {
        r.data_nonpositive = false;
        break;
      }
    }
  }
  r.linf = u.values().size() ? u.values().cwiseAbs().maxCoeff() : 0.0;
  r.max_u = u.values().size() ? std::max(0.0, u.values().maxCoeff()) : 0.0;
  r.verdict = make_verdict("max_principle", r.max_u, 1e-8 * r.linf, 0.0);
  r.verdict.hard = false;
  r.applicable = r.positive_offdiagonals == 0 && r.data_nonpositive;
  if (!r.applicable) {
    r.verdict.status = VerdictStatus::not_applicable;
    r.verdict.note = r.positive_offdiagonals
                         ? std::to_string(r.positive_offdiagonals) + " positive off-diagonal entries"
                         : std::string("data not nonpositive");
  }
  return r;
}

}  // namespace divfree
