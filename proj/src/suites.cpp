#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "divfree/density.hpp"
#include "divfree/experiment.hpp"
#include "divfree/log.hpp"
#include "suites.hpp"

namespace divfree::suites {

namespace {

std::vector<double> default_levels() {
  std::vector<double> out;
  for (double n = 1.0; n <= 1024.0; n *= 2.0) out.push_back(n);
  return out;
}

std::vector<double> levels_option(const ExperimentConfig& cfg, const std::string& suite) {
  const json v = cfg.option(suite, "levels", json());
  if (v.is_null()) return default_levels();
  if (!v.is_array() || v.empty()) throw ConfigError(suite + ".levels", "must be a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number() || !(v[i].get<double>() > 0.0))
      throw ConfigError(suite + ".levels[" + std::to_string(i) + "]", "must be a positive number");
    out.push_back(v[i].get<double>());
  }
  std::sort(out.begin(), out.end());
  return out;
}

double number_option(const ExperimentConfig& cfg, const std::string& suite, const std::string& key, double fallback) {
  const json v = cfg.option(suite, key, fallback);
  if (!v.is_number()) throw ConfigError(suite + "." + key, "must be a number");
  return v.get<double>();
}

std::string level_name(const std::string& base, double n) { return base + "[n=" + format_double(n) + "]"; }

double rel_h1(const FemSpace& space, const Vector& a, const Vector& b) {
  const double nb = norm(space, b, NormKind::h1);
  const double diff = norm(space, Vector(a - b), NormKind::h1);
  return nb == 0.0 ? diff : diff / nb;
}

/// Counting verdict: holds iff no offending instance was found.
Verdict count_verdict(std::string name, std::size_t count, std::string note = {}) {
  Verdict v = make_verdict(std::move(name), static_cast<double>(count), 0.0, 0.0);
  v.note = std::move(note);
  return v;
}

bool energy_applicable(const Coefficients& cf) { return cf.h.zero() && cf.c.nonnegative(); }

/// ||f||_{L^{2d/(d+2)}}, computed on first use.
class EnergyNorm {
 public:
  EnergyNorm(ScalarField f, GridSpec grid) : f_(std::move(f)), grid_(std::move(grid)) {}
  double get() {
    if (!value_) value_ = lp_norm(f_, 2.0 * grid_.dim / (grid_.dim + 2.0), grid_).value;
    return *value_;
  }

 private:
  ScalarField f_;
  GridSpec grid_;
  std::optional<double> value_;
};

Verdict energy_or_skip(const DiscreteFunction& u, const Coefficients& cf, std::string name, EnergyNorm& fnorm) {
  if (!energy_applicable(cf)) {
    Verdict v;
    v.name = std::move(name);
    v.status = VerdictStatus::not_applicable;
    v.hard = false;
    v.note = cf.h.zero() ? "c not declared nonnegative" : "drift present";
    return v;
  }
  Verdict v = check_energy(u, fnorm.get(), cf.a.lambda(), u.space().dim());
  v.name = std::move(name);
  return v;
}

void record_split(EstimateReport& r, const DiscreteProblem& p) {
  r.constant("N", p.split.level);
  r.constant("gamma", p.gamma);
  r.constant("split_tail", p.split.tail);
  r.constant("split_threshold", p.split.threshold);
}

// prod_i sin(k_i pi (x_i - lo_i) / L_i)
struct Manufactured {
  GridSpec grid;
  std::vector<int> k;

  double value(std::span<const double> x) const {
    double v = 1.0;
    for (int i = 0; i < grid.dim; ++i) v *= std::sin(w(i) * (x[i] - grid.extents[i].lo));
    return v;
  }
  double w(int i) const { return k[i] * std::numbers::pi / grid.extents[i].length(); }
  double s(int i, std::span<const double> x) const { return std::sin(w(i) * (x[i] - grid.extents[i].lo)); }
  double c(int i, std::span<const double> x) const { return std::cos(w(i) * (x[i] - grid.extents[i].lo)); }

  void gradient(std::span<const double> x, std::span<double> g) const {
    for (int j = 0; j < grid.dim; ++j) {
      double v = w(j) * c(j, x);
      for (int i = 0; i < grid.dim; ++i)
        if (i != j) v *= s(i, x);
      g[j] = v;
    }
  }
};

}  // namespace

EstimateReport manufactured(const ExperimentConfig& cfg) {
  EstimateReport r;
  const auto fields = build_fields(cfg, cfg.grid);
  if (!fields.a_constant) throw ConfigError("fields.a", "the manufactured suite needs a constant diffusion matrix");
  const int d = cfg.grid.dim;
  if (d > 8) throw ConfigError("grid.dim", "the manufactured suite supports d <= 8");
  std::vector<int> k(d, 1);
  if (const json v = cfg.option("manufactured", "frequencies", json()); !v.is_null()) {
    if (!v.is_array() || v.size() != static_cast<std::size_t>(d))
      throw ConfigError("manufactured.frequencies", "expected " + std::to_string(d) + " integers");
    for (int i = 0; i < d; ++i) {
      if (!v[i].is_number_integer() || v[i].get<int>() < 1)
        throw ConfigError("manufactured.frequencies", "entries must be positive integers");
      k[i] = v[i].get<int>();
    }
  }
  const double min_order = number_option(cfg, "manufactured", "min_order", 1.8);
  if (cfg.cells_ladder.size() < 2) throw ConfigError("grid.cells", "the manufactured suite needs at least two levels");

  const Manufactured exact{cfg.grid, k};
  std::vector<double> amat(d * d);
  std::vector<double> origin(d);
  for (int i = 0; i < d; ++i) origin[i] = cfg.grid.extents[i].lo;
  fields.coefficients.a(origin, amat);
  Coefficients cf = fields.coefficients;
  const VectorField h = cf.h;
  const ScalarField c = cf.c;
  cf.f = ScalarField(
      [exact, amat, h, c, d](std::span<const double> x) {
        double sn[8], cs[8], hv[8];
        for (int i = 0; i < d; ++i) {
          const double t = exact.w(i) * (x[i] - exact.grid.extents[i].lo);
          sn[i] = std::sin(t);
          cs[i] = std::cos(t);
        }
        h(x, std::span<double>(hv, d));
        auto product = [&](int a, int b) {
          double v = 1.0;
          for (int i = 0; i < d; ++i) {
            if (i == a && i == b) v *= -exact.w(i) * exact.w(i) * sn[i];
            else if (i == a || i == b) v *= exact.w(i) * cs[i];
            else v *= sn[i];
          }
          return v;
        };
        double v = c(x) * product(-1, -1);
        for (int a = 0; a < d; ++a) {
          v += hv[a] * product(a, -1);
          for (int b = 0; b < d; ++b) v -= amat[a * d + b] * product(a, b);
        }
        return v;
      },
      "manufactured_load");
  EnergyNorm fnorm(cf.f, cfg.grid_at(cfg.cells_ladder.front()));

  auto& t = r.table("convergence", {"cells", "h", "dofs", "l2_error", "h1_error", "l2_order", "h1_order"});
  std::vector<double> l2, h1, hs;
  double worst_order = kInfinity;
  for (int n : cfg.cells_ladder) {
    const GridSpec g = cfg.grid_at(n);
    const auto space = build_space(g);
    const auto p = make_problem(space, cf, 0.0);
    const auto s = direct_solve(p, cfg.solver);
    const DiscreteFunction& uh = s.solution;
    const ScalarField uf = uh.as_field();
    const VectorField gf = uh.gradient_field();
    const AdaptiveOptions once{1e-10, 0, 0, 4};
    const double e2 = lp_norm(ScalarField([&](std::span<const double> x) { return uf(x) - exact.value(x); }), 2.0,
                              g, once).value;
    const VectorField ge(d, [&](std::span<const double> x, std::span<double> out) {
      std::vector<double> ex(d);
      gf(x, out);
      exact.gradient(x, ex);
      for (int i = 0; i < d; ++i) out[i] -= ex[i];
    });
    const double e1 = lp_norm(ge, 2.0, g, once).value;
    const double hh = g.spacing(0);
    double o2 = 0.0, o1 = 0.0;
    if (!l2.empty()) {
      o2 = std::log(l2.back() / e2) / std::log(hs.back() / hh);
      o1 = std::log(h1.back() / e1) / std::log(hs.back() / hh);
      worst_order = std::min(worst_order, o2);
    }
    l2.push_back(e2);
    h1.push_back(e1);
    hs.push_back(hh);
    t.add_row({static_cast<long long>(n), hh, static_cast<long long>(space->size()), e2, e1, o2, o1});
    r.solves.push_back(to_json(s, "cells=" + std::to_string(n)));
    r.add(energy_or_skip(uh, cf, "energy[cells=" + std::to_string(n) + "]", fnorm));
    log_info("manufactured: " + std::to_string(n) + " cells/axis, L2 error " + format_double(e2));
  }
  r.measured("l2_error_finest", l2.back());
  r.measured("h1_error_finest", h1.back());
  r.constant("observed_l2_order_min", worst_order);
  Verdict v = make_verdict("l2_order", min_order, worst_order, 0.0);
  v.note = "observed L2 order over consecutive levels must be at least " + format_double(min_order);
  r.add(v);
  return r;
}

EstimateReport well_posedness(const ExperimentConfig& cfg) {
  EstimateReport r;
  const auto fields = build_fields(cfg, cfg.grid);
  const Coefficients& cf = fields.coefficients;
  const int d = cfg.grid.dim;
  const auto space = build_space(cfg.grid);
  const auto p = make_problem(space, cf);
  const auto ell = sample_ellipticity(cf.a, cfg.grid);
  r.constant("lambda", cf.a.lambda());
  r.constant("M", cf.a.bound());
  r.constant("sobolev_factor", sobolev_factor(d));
  r.constant("K", boundedness_constant(cf.a, cf.h, cf.c, cfg.grid));
  record_split(r, p);
  r.measured("sampled_min_eigenvalue", ell.min_eigenvalue);
  r.measured("sampled_max_entry", ell.max_entry);
  r.add(count_verdict("ellipticity_declared", ell.consistent ? 0 : 1, "sampled A respects the declared lambda and M"));

  const double tol = number_option(cfg, "well_posedness", "agreement_tol", 1e-8);
  const auto direct = direct_solve(p, cfg.solver);
  const auto fred = fredholm_solve(p, p.load, cfg.solver);
  r.solves.push_back(to_json(direct, "direct"));
  r.solves.push_back(to_json(fred, "fredholm"));
  const double diff = rel_h1(*space, fred.solution.values(), direct.solution.values());
  r.measured("fredholm_direct_rel_h1", diff);
  r.measured("fixed_point_residual", fixed_point_residual(p, direct.solution.values(), p.load, cfg.solver));
  r.add(make_verdict("fredholm_vs_direct", diff, tol, 0.0));

  // gamma = 0: the pipeline is one Lax-Milgram solve
  DiscreteProblem p0 = p;
  p0.gamma = 0.0;
  const auto lm = lax_milgram_solve(p0, p0.load, cfg.solver);
  const auto f0 = fredholm_solve(p0, p0.load, cfg.solver);
  const double diff0 = (lm.solution.values() - f0.solution.values()).cwiseAbs().maxCoeff();
  r.measured("gamma0_fredholm_lax_milgram_max", diff0);
  r.measured("gamma0_fredholm_direct_rel_h1", rel_h1(*space, f0.solution.values(), direct.solution.values()));
  r.add(make_verdict("gamma0_coincidence", diff0, 1e-12, 0.0));

  r.measured("u_h1", norm(direct.solution, NormKind::h1));
  r.measured("u_linf", norm(direct.solution, NormKind::linf));
  EnergyNorm fnorm(cf.f, cfg.grid);
  r.add(energy_or_skip(direct.solution, cf, "energy", fnorm));
  return r;
}

EstimateReport rough_c_ladder(const ExperimentConfig& cfg) {
  EstimateReport r;
  const auto fields = build_fields(cfg, cfg.grid);
  const Coefficients& cf = fields.coefficients;
  const auto levels = levels_option(cfg, "rough_c_ladder");
  const double p_hat = number_option(cfg, "rough_c_ladder", "p_hat", 6.0);
  const double band = number_option(cfg, "rough_c_ladder", "band", 1.05);
  const int d = cfg.grid.dim;
  if (!(p_hat > d)) throw ConfigError("rough_c_ladder.p_hat", "must exceed the dimension");
  r.constant("p_hat", p_hat);
  r.constant("band", band);
  r.constant("sobolev_factor", sobolev_factor(d));

  const auto ladder = rough_c_solve(cf, cfg.grid, levels, cfg.parallel, cfg.solver);
  const double fnorm = lp_norm(cf.f, p_hat * d / (d + p_hat), cfg.grid).value;
  r.measured("f_norm_p1", fnorm);

  EnergyNorm enorm(cf.f, cfg.grid);
  auto& t = r.table("ladder", {"n", "linf", "grad_l2", "energy", "h1_difference", "linf_ratio", "energy_margin"});
  std::vector<double> ratios;
  std::size_t increases = 0;
  std::string where;
  for (std::size_t i = 0; i < ladder.levels.size(); ++i) {
    const auto& lv = ladder.levels[i];
    const double ratio = fnorm == 0.0 ? 0.0 : lv.linf / fnorm;
    ratios.push_back(ratio);
    if (i >= 2 && lv.h1_difference >= ladder.levels[i - 1].h1_difference) {
      ++increases;
      where += (where.empty() ? "" : ", ") + format_double(lv.level);
    }
    Coefficients at = cf;
    at.c = truncate(cf.c, lv.level);
    const Verdict e = r.add(energy_or_skip(lv.report.solution, at, level_name("energy", lv.level), enorm));
    t.add_row({lv.level, lv.linf, lv.grad_l2, lv.energy, lv.h1_difference, ratio, e.margin});
    r.solves.push_back(to_json(lv.report, level_name("ladder", lv.level)));
  }
  Verdict mono = count_verdict("h1_differences_decreasing", increases,
                               where.empty() ? "" : "non-decreasing at n = " + where);
  r.add(mono);
  r.add(check_linf_band(ratios, band));

  if (ladder.symmetric) {
    Coefficients free = cf;
    free.c = constant_scalar(0.0);
    const auto u0 = direct_solve(make_problem(build_space(cfg.grid), free, 0.0), cfg.solver);
    const double r0 = fnorm == 0.0 ? 0.0 : norm(u0.solution, NormKind::linf) / fnorm;
    r.measured("c_free_linf_ratio", r0);
    Verdict env = make_verdict("c_free_envelope", *std::max_element(ratios.begin(), ratios.end()), r0);
    env.hard = false;
    env.note = "ladder ratios below the c = 0 ratio";
    r.add(env);
  }
  return r;
}

EstimateReport divfree(const ExperimentConfig& cfg) {
  EstimateReport r;
  const auto fields = build_fields(cfg, cfg.grid);
  const Coefficients& cf = fields.coefficients;
  const double tol = number_option(cfg, "divfree", "residual_tol", 1e-8);
  const double rho_tol = number_option(cfg, "divfree", "rho_tol", 0.05);
  const double harnack_tol = number_option(cfg, "divfree", "harnack_tol", 0.02);

  InvariantDensity rho;
  try {
    rho = compute_rho(cf.a, cf.h, cfg.grid);
  } catch (const NumericalError& e) {
    if (e.kind() != "density_positivity") throw;
    r.add(count_verdict("rho_positive", 1, e.what()));
    return r;
  }
  r.add(count_verdict("rho_positive", rho.min > 0.0 ? 0 : 1));
  r.constant("harnack_ratio", rho.harnack_ratio);
  r.constant("rho_min", rho.min);
  r.constant("rho_max", rho.max);
  r.constant("x1_node", static_cast<double>(rho.x1));

  const auto res = divergence_residual(rho, cf.a, cf.h);
  r.measured("divergence_residual", res.max_normalized);
  r.measured("rho_b_l2", res.rho_b_l2);
  r.add(make_verdict("divergence_free", res.max_normalized, tol, 0.0));

  if (fields.drift_potential && fields.a_scale > 0.0) {
    // A = s I and H = grad V: rho = exp(-V / s)
    const Potential& v = *fields.drift_potential;
    const double s = fields.a_scale;
    Potential scaled{ScalarField([v, s](std::span<const double> x) { return v.value(x) / s; }),
                     VectorField(cfg.grid.dim, [v, s](std::span<const double> x, std::span<double> out) {
                       v.gradient(x, out);
                       for (auto& o : out) o /= s;
                     })};
    const auto exact = exact_density(cfg.grid, boltzmann(scaled), rho.x1);
    double diff = 0.0;
    for (std::size_t i = 0; i < rho.nodal.size(); ++i) diff = std::max(diff, std::abs(rho.nodal[i] - exact.nodal[i]));
    r.constant("harnack_ratio_exact", exact.harnack_ratio);
    r.measured("rho_exact_linf_difference", diff);
    r.add(make_verdict("rho_vs_exact", diff, rho_tol, 0.0));
    Verdict k1 = make_verdict("harnack_vs_exact",
                              std::abs(rho.harnack_ratio - exact.harnack_ratio) / exact.harnack_ratio, harnack_tol, 0.0);
    if (!fields.drift_constant) {
      k1.hard = false;
      k1.note = "nodal extremes of a non-constant drift converge slowly";
    }
    r.add(k1);
  }

  const auto t = transform(cf, rho, tol);
  if (!t.residual_ok()) r.notes.push_back(t.provenance);
  const auto space = build_space(cfg.grid);
  const auto orig = direct_solve(make_problem(space, cf, 0.0), cfg.solver);
  const auto trans = direct_solve(make_problem(space, t.coefficients, 0.0), cfg.solver);
  r.solves.push_back(to_json(orig, "original"));
  r.solves.push_back(to_json(trans, "transformed"));
  r.measured("gap_h1", norm(*space, Vector(orig.solution.values() - trans.solution.values()), NormKind::h1));
  const double ident = test_function_identity(t, rho, orig.solution);
  const double scale = std::max(1.0, orig.solution.values().cwiseAbs().maxCoeff());
  r.measured("test_function_identity", ident);
  r.add(make_verdict("test_function_identity", ident, 1e-10 * scale, 0.0));

  auto& table = r.table("rho", {"node", "rho"});
  for (std::size_t i = 0; i < rho.nodal.size(); ++i)
    table.add_row({static_cast<long long>(i), rho.nodal[i]});
  return r;
}

EstimateReport transformation(const ExperimentConfig& cfg) {
  EstimateReport r;
  const auto fields = build_fields(cfg, cfg.grid);
  const std::string source = cfg.option("transformation", "density", "computed").get<std::string>();
  if (source != "computed" && source != "exact")
    throw ConfigError("transformation.density", "must be \"computed\" or \"exact\"");
  if (cfg.cells_ladder.size() < 3) throw ConfigError("grid.cells", "the transformation suite needs at least three levels");
  std::optional<Potential> exact;
  if (source == "exact") {
    if (!fields.drift_potential || fields.a_scale != 1.0)
      throw ConfigError("transformation.density", "exact density needs A = I and a drift with known potential");
    exact = boltzmann(*fields.drift_potential);
  }
  const auto gap = equivalence_gap(fields.coefficients, cfg.grid, cfg.cells_ladder,
                                   source == "exact" ? DensitySource::exact : DensitySource::computed, exact,
                                   cfg.solver);
  auto& t = r.table("gap", {"cells", "gap_h1", "u_h1", "harnack_ratio", "divergence_residual"});
  std::size_t rises = 0;
  for (std::size_t i = 0; i < gap.levels.size(); ++i) {
    const auto& g = gap.levels[i];
    t.add_row({static_cast<long long>(g.cells), g.gap_h1, g.u_h1, g.harnack_ratio, g.divergence_residual});
    if (i > 0 && !(g.gap_h1 < gap.levels[i - 1].gap_h1)) ++rises;
  }
  r.constant("observed_order", gap.observed_order);
  r.measured("gap_finest", gap.levels.back().gap_h1);
  r.add(count_verdict("gap_decreasing", rises, rises ? "transformation inconsistency" : ""));
  if (source == "exact") {
    const int at = static_cast<int>(number_option(cfg, "transformation", "exact_cells", 8.0));
    auto it = std::find_if(gap.levels.begin(), gap.levels.end(), [&](const GapLevel& g) { return g.cells == at; });
    if (it == gap.levels.end()) throw ConfigError("transformation.exact_cells", "not a level of grid.cells");
    r.add(make_verdict("exact_gap", it->gap_h1, 10.0 * cfg.solver.inner_tol, 0.0));
  }
  return r;
}

EstimateReport interpolation(const ExperimentConfig& cfg) {
  EstimateReport r;
  const auto fields = build_fields(cfg, cfg.grid);
  const Coefficients& cf = fields.coefficients;
  const double rr = number_option(cfg, "interpolation", "r", 3.0);
  const double p_hat = number_option(cfg, "interpolation", "p_hat", 6.0);
  ExponentSet e;
  try {
    e = exponent_set(cfg.grid.dim, rr, p_hat);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("interpolation", ex.what());
  }
  const auto levels = levels_option(cfg, "interpolation");
  r.constant("k", e.k);
  r.constant("theta", e.theta);
  r.constant("q_theta", e.q_theta);
  r.constant("p_theta", e.p_theta);
  r.constant("s", e.s);
  r.constant("sobolev_factor", sobolev_factor(cfg.grid.dim));

  const auto cal = calibrate(cf, cfg.grid, levels, e, calibration_family(cfg.grid), cfg.solver);
  r.constant("C1_eff", cal.constants.c1);
  r.constant("C2_eff", cal.constants.c2);
  auto& ct = r.table("calibration", {"data", "n", "ratio_c1", "ratio_c2"});
  for (const auto& s : cal.samples) ct.add_row({s.data, s.level, s.ratio_c1, s.ratio_c2});

  const auto ladder = rough_c_solve(cf, cfg.grid, levels, cfg.parallel, cfg.solver);
  auto& t = r.table("interpolation", {"n", "lhs", "rhs", "margin"});
  for (const auto& lv : ladder.levels) {
    Verdict v = check_interpolation(lv.report.solution, cf.f, e, cal.constants);
    v.name = level_name("interpolation", lv.level);
    t.add_row({lv.level, v.lhs, v.rhs, v.margin});
    r.add(std::move(v));
  }
  return r;
}

EstimateReport max_principle(const ExperimentConfig& cfg) {
  EstimateReport r;
  const auto fields = build_fields(cfg, cfg.grid);
  const auto space = build_space(cfg.grid);
  const auto p = make_problem(space, fields.coefficients, 0.0);
  const auto s = direct_solve(p, cfg.solver);
  r.solves.push_back(to_json(s, "direct"));
  const auto m = max_principle_diagnostic(p, fields.coefficients.f, s.solution);
  r.measured("positive_offdiagonals", static_cast<double>(m.positive_offdiagonals));
  r.measured("max_u", m.max_u);
  r.measured("u_linf", m.linf);
  r.constant("applicable", m.applicable ? 1.0 : 0.0);
  r.constant("data_nonpositive", m.data_nonpositive ? 1.0 : 0.0);
  r.add(m.verdict);
  return r;
}

EstimateReport duality(const ExperimentConfig& cfg) {
  EstimateReport r;
  const auto fields = build_fields(cfg, cfg.grid);
  const auto space = build_space(cfg.grid);
  const auto p = make_problem(space, fields.coefficients);
  record_split(r, p);
  const double tol = number_option(cfg, "duality", "tol", 1e-8);
  const double detect = number_option(cfg, "duality", "detect", 1e-3);
  const double eps = number_option(cfg, "duality", "perturbation", 1e-2);
  const auto u1 = direct_solve(p, cfg.solver);
  const auto u2 = fredholm_solve(p, p.load, cfg.solver);
  r.solves.push_back(to_json(u1, "direct"));
  r.solves.push_back(to_json(u2, "fredholm"));
  const double ul2 = norm(u1.solution, NormKind::l2);
  const auto probes = default_probes(cfg.grid);

  const Vector bump = space->interpolate(probes.front().field);
  const double bl2 = norm(*space, bump, NormKind::l2);
  const DiscreteFunction planted(space, u1.solution.values() + (eps * ul2 / bl2) * bump);

  auto& t = r.table("probes", {"frequencies", "solutions", "planted"});
  const auto same = duality_probe(p, u1.solution, u2.solution, probes);
  const auto off = duality_probe(p, planted, u1.solution, probes);
  double worst = 0.0, best = 0.0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const double scale = same[i].phi_l2 * ul2;
    const double a = scale == 0.0 ? std::abs(same[i].integral) : std::abs(same[i].integral) / scale;
    const double b = scale == 0.0 ? std::abs(off[i].integral) : std::abs(off[i].integral) / scale;
    worst = std::max(worst, a);
    best = std::max(best, b);
    std::string k;
    for (int f : probes[i].frequencies) k += (k.empty() ? "" : " ") + std::to_string(f);
    t.add_row({k, a, b});
  }
  r.add(make_verdict("probes_vanish", worst, tol, 0.0));
  Verdict v = make_verdict("planted_detected", detect, best, 0.0);
  v.note = "largest normalized probe integral of a planted non-solution";
  r.add(v);
  return r;
}

EstimateReport exponents(const ExperimentConfig& cfg) {
  EstimateReport r;
  (void)cfg;
  auto& t = r.table("sweep", {"d", "r", "p_hat", "k", "theta", "q_theta", "p_theta", "s", "max_defect"});
  double worst = 0.0;
  std::size_t count = 0;
  for (int d : {3, 4, 5}) {
    for (double p_hat : {d + 1.0, 2.0 * d, 10.0 * d}) {
      for (int j = 0; j < 9; ++j) {
        const double rr = 2.0 + (d - 2.0) * j / 8.0;
        const auto e = exponent_set(d, rr, p_hat);
        double defect = 0.0;
        for (const auto& id : e.identities()) defect = std::max(defect, id.defect);
        worst = std::max(worst, defect);
        ++count;
        t.add_row({static_cast<long long>(d), rr, p_hat, e.k, e.theta, e.q_theta, e.p_theta, e.s, defect});
      }
    }
  }
  r.measured("cases", static_cast<double>(count));
  r.measured("max_identity_defect", worst);
  r.add(make_verdict("identities", worst, 1e-12, 0.0));
  const auto spot = exponent_set(3, 3.0, 6.0);
  const double spot_err = std::max({std::abs(spot.k - 2.0), std::abs(spot.q_theta - 12.0),
                                    std::abs(spot.p_theta - 1.5), std::abs(spot.s - 12.0 / 11.0)});
  r.add(make_verdict("spot_3_3_6", spot_err, 1e-12, 0.0));
  return r;
}

}  // namespace divfree::suites
