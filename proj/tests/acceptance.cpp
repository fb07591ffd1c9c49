// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "divfree/density.hpp"
#include "divfree/experiment.hpp"
#include "divfree/solver.hpp"
#include "divfree/verify.hpp"

using namespace divfree;

namespace {

int failures = 0;

void verdict(int id, const std::string& title, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void note(const std::string& text) {
  std::printf("       %s\n", text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double sine3(std::span<const double> x) {
  const double pi = std::numbers::pi;
  return std::sin(pi * x[0]) * std::sin(pi * x[1]) * std::sin(pi * x[2]);
}

Coefficients laplace(ScalarField c, ScalarField f) {
  return {identity_matrix(3), constant_vector({0.0, 0.0, 0.0}), std::move(c), std::move(f)};
}

Coefficients drift_problem() {
  return {identity_matrix(3), constant_vector({1.0, 0.0, 0.0}), constant_scalar(0.0), trig_product(1.0, {1, 1, 1})};
}

std::vector<double> ladder_levels() {
  std::vector<double> out;
  for (double n = 1.0; n <= 1024.0; n *= 2.0) out.push_back(n);
  return out;
}

double rel_h1(const FemSpace& space, const Vector& a, const Vector& b) {
  return norm(space, Vector(a - b), NormKind::h1) / norm(space, b, NormKind::h1);
}

struct LadderCheck {
  bool monotone = true;
  std::string rises;
  double band_max = 0.0, band_median = 0.0, band_min = 0.0;
  bool energy_ok = true;
  double energy_worst = 0.0;
};

LadderCheck check_ladder(const ScalarField& c, const GridSpec& g) {
  const ScalarField f = trig_product(1.0, {1, 1, 1});
  const auto ladder = rough_c_solve(laplace(c, f), g, ladder_levels());
  LadderCheck out;
  // int_0^1 sin^q(pi t) dt = Gamma((q+1)/2) / (sqrt(pi) Gamma(q/2+1))
  auto sine_moment = [](double q) { return std::tgamma(0.5 * (q + 1.0)) / (std::sqrt(std::numbers::pi) * std::tgamma(0.5 * q + 1.0)); };
  const double f_p1 = std::pow(sine_moment(2.0), 1.5);
  const double f_p0 = std::pow(sine_moment(1.2), 3.0 / 1.2);
  std::vector<double> ratios;
  for (std::size_t i = 0; i < ladder.levels.size(); ++i) {
    const auto& lv = ladder.levels[i];
    ratios.push_back(lv.linf / f_p1);
    if (i >= 2 && lv.h1_difference >= ladder.levels[i - 1].h1_difference) {
      out.monotone = false;
      out.rises += (out.rises.empty() ? "" : ",") + fmt("%g", lv.level);
    }
    const double margin = lv.grad_l2 / (4.0 * f_p0);
    out.energy_worst = std::max(out.energy_worst, margin);
    out.energy_ok = out.energy_ok && margin <= 1.0 + 1e-8;
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  out.band_min = sorted.front();
  out.band_max = sorted.back();
  const std::size_t m = sorted.size();
  out.band_median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  return out;
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main() {
  const GridSpec g16 = GridSpec::unit_cube(3, 16);
  const GridSpec g8 = GridSpec::unit_cube(3, 8);

  // 1. manufactured solution
  {
    const double pi = std::numbers::pi;
    const ScalarField f([pi](std::span<const double> x) { return 3.0 * pi * pi * sine3(x); });
    std::vector<double> err;
    for (int n : {4, 8, 16}) {
      const auto space = build_space(GridSpec::unit_cube(3, n));
      const auto s = direct_solve(make_problem(space, laplace(constant_scalar(0.0), f), 0.0));
      const ScalarField uh = s.solution.as_field();
      err.push_back(lp_norm(ScalarField([&](std::span<const double> x) { return uh(x) - sine3(x); }), 2.0,
                            space->grid(), {1e-10, 0, 0, 4})
                        .value);
    }
    const double o1 = std::log2(err[0] / err[1]), o2 = std::log2(err[1] / err[2]);
    verdict(1, "manufactured convergence", o1 >= 1.8 && o2 >= 1.8,
            "L2 errors " + fmt("%.3e", err[0]) + " " + fmt("%.3e", err[1]) + " " + fmt("%.3e", err[2]) +
                ", orders " + fmt("%.3f", o1) + " " + fmt("%.3f", o2) + " (need >= 1.8)");
  }

  // 3 first: its ladder feeds the energy criterion
  const auto center = check_ladder(radial_power({0.5, 0.5, 0.5}, 2.5), g16);
  const auto corner = check_ladder(radial_power({0.0, 0.0, 0.0}, 2.5), g16);

  // 2. energy inequality on every c >= 0 configuration
  {
    bool ok = center.energy_ok && corner.energy_ok;
    double worst = std::max(center.energy_worst, corner.energy_worst);
    for (double cv : {0.0, 1.0, 100.0}) {
      const auto space = build_space(g16);
      const auto u = direct_solve(make_problem(space, laplace(constant_scalar(cv), trig_product(1.0, {1, 1, 1})), 0.0));
      const auto v = check_energy(u.solution, trig_product(1.0, {1, 1, 1}), 1.0, 3);
      ok = ok && v.ok() && sobolev_factor(3) == 4.0;
      worst = std::max(worst, v.margin);
    }
    verdict(2, "energy inequality", ok && worst < 1.0,
            "worst margin " + fmt("%.4f", worst) + " over c in {0, 1, 100} and both singular ladders (constant 4)");
  }

  verdict(3, "truncation ladder (singular point at the center)", center.monotone &&
              center.band_max <= 1.05 * center.band_median,
          std::string("H1 differences ") + (center.monotone ? "decrease" : "rise at n=" + center.rises) +
              "; L-inf ratio min/median/max " + fmt("%.4f", center.band_min) + "/" + fmt("%.4f", center.band_median) +
              "/" + fmt("%.4f", center.band_max) + " (band " + fmt("%.1f%%", 100 * (center.band_max / center.band_median - 1)) +
              ", need <= 5%)");
  note("singular point at a corner: H1 differences " + std::string(corner.monotone ? "decrease" : "rise at n=" + corner.rises) +
       ", band " + fmt("%.2f%%", 100 * (corner.band_max / corner.band_median - 1)));

  // 4 and 5. invariant density
  {
    const auto rho_c = compute_rho(identity_matrix(3), constant_vector({1.0, 0.0, 0.0}), g16);
    const double k1_err = std::abs(rho_c.harnack_ratio - std::numbers::e) / std::numbers::e;

    const double pi = std::numbers::pi;
    auto v = [pi](std::span<const double> x) {
      return std::sin(2 * pi * x[0]) * std::sin(2 * pi * x[1]) * std::sin(2 * pi * x[2]);
    };
    const auto pot = trig_potential(1.0, {2, 2, 2});
    const auto rho_g = compute_rho(identity_matrix(3), gradient_potential(pot), g16);
    std::vector<double> x1(3);
    g16.node_point(rho_g.x1, x1);
    double diff = 0.0;
    std::vector<double> x(3);
    for (std::size_t i = 0; i < g16.num_nodes(); ++i) {
      g16.node_point(i, x);
      diff = std::max(diff, std::abs(rho_g.nodal[i] - std::exp(v(x1) - v(x))));
    }
    verdict(4, "invariant density", k1_err <= 0.02 && diff <= 0.05 && rho_c.min > 0.0 && rho_g.min > 0.0,
            "constant drift K1 = " + fmt("%.5f", rho_c.harnack_ratio) + " (e: " + fmt("%.2f%%", 100 * k1_err) +
                " off); gradient drift sup|rho - exp(-V)/exp(-V(x1))| = " + fmt("%.4f", diff) + "; min rho " +
                fmt("%.4g", rho_c.min) + ", " + fmt("%.4g", rho_g.min));

    const auto rc = divergence_residual(rho_c, identity_matrix(3), constant_vector({1.0, 0.0, 0.0}));
    const auto rg = divergence_residual(rho_g, identity_matrix(3), gradient_potential(pot));
    verdict(5, "divergence-free identity", rc.max_normalized <= 1e-8 && rg.max_normalized <= 1e-8,
            "max normalized residual over all basis functions " + fmt("%.3e", rc.max_normalized) +
                " (constant drift), " + fmt("%.3e", rg.max_normalized) + " (gradient drift)");
  }

  // 6. transformation equivalence
  {
    const auto gap = equivalence_gap(drift_problem(), GridSpec::unit_cube(3, 4), {4, 8, 16});
    const bool dec = gap.levels[1].gap_h1 < gap.levels[0].gap_h1 && gap.levels[2].gap_h1 < gap.levels[1].gap_h1;
    const auto pot = trig_potential(1.0, {2, 2, 2});
    const Coefficients grad{identity_matrix(3), gradient_potential(pot), constant_scalar(0.0),
                            trig_product(1.0, {1, 1, 1})};
    const SolverOptions opts;
    const auto exact = equivalence_gap(grad, g8, {8}, DensitySource::exact, boltzmann(pot), opts);
    const double tol = 10.0 * opts.inner_tol;
    verdict(6, "transformation equivalence", dec && exact.levels[0].gap_h1 <= tol,
            "constant drift gaps " + fmt("%.3e", gap.levels[0].gap_h1) + " " + fmt("%.3e", gap.levels[1].gap_h1) + " " +
                fmt("%.3e", gap.levels[2].gap_h1) + (dec ? " (decreasing)" : " (not decreasing)") +
                "; exact rho gradient drift gap at 8^3 " + fmt("%.3e", exact.levels[0].gap_h1) + " (need <= " +
                fmt("%.0e", tol) + ")");
  }

  // 7. Fredholm pipeline
  {
    const auto space = build_space(g8);
    const auto p = make_problem(space, drift_problem());
    const auto d = direct_solve(p);
    const auto f = fredholm_solve(p, p.load);
    const double diff = rel_h1(*space, f.solution.values(), d.solution.values());

    const auto q = make_problem(space, laplace(constant_scalar(1.0), trig_product(1.0, {1, 1, 1})));
    SolverOptions tight;
    tight.inner_tol = 1e-14;
    const auto dq = direct_solve(q);
    const auto fq = fredholm_solve(q, q.load, tight);
    const auto lq = lax_milgram_solve(q, q.load, tight);
    const double diff0 = rel_h1(*space, fq.solution.values(), dq.solution.values());
    const double same = (fq.solution.values() - lq.solution.values()).cwiseAbs().maxCoeff();
    verdict(7, "Fredholm pipeline", p.gamma > 0.0 && diff <= 1e-8 && q.gamma == 0.0 && diff0 <= 1e-12 && same == 0.0,
            "gamma = " + fmt("%.4g", p.gamma) + ": relative H1 difference " + fmt("%.3e", diff) +
                "; gamma = 0: " + fmt("%.3e", diff0) + " against the direct solve, " + fmt("%.1e", same) +
                " against Lax-Milgram");
  }

  // 8. duality probe
  {
    const auto space = build_space(g8);
    const auto p = make_problem(space, drift_problem());
    const auto u1 = direct_solve(p);
    const auto u2 = fredholm_solve(p, p.load);
    const auto probes = default_probes(g8);
    const double ul2 = norm(u1.solution, NormKind::l2);
    double worst = 0.0;
    for (const auto& v : duality_probe(p, u1.solution, u2.solution, probes))
      worst = std::max(worst, std::abs(v.integral) / (v.phi_l2 * ul2));
    const Vector bump = space->interpolate(probes[2].field);
    const DiscreteFunction planted(space,
                                   u1.solution.values() + (1e-2 * ul2 / norm(*space, bump, NormKind::l2)) * bump);
    double best = 0.0;
    for (const auto& v : duality_probe(p, planted, u1.solution, probes))
      best = std::max(best, std::abs(v.integral) / (v.phi_l2 * ul2));
    verdict(8, "duality probe", probes.size() == 8 && worst <= 1e-8 && best >= 1e-3,
            "8 probes, largest normalized integral " + fmt("%.3e", worst) + " for two solves, " + fmt("%.3e", best) +
                " for the planted perturbation");
  }

  // 9. exponent algebra
  {
    double worst = 0.0;
    int cases = 0;
    for (int d : {3, 4, 5})
      for (double p_hat : {d + 1.0, 2.0 * d, 10.0 * d})
        for (int j = 0; j < 9; ++j) {
          const auto e = exponent_set(d, 2.0 + (d - 2.0) * j / 8.0, p_hat);
          for (const auto& id : e.identities()) worst = std::max(worst, id.defect);
          ++cases;
        }
    const auto e = exponent_set(3, 3.0, 6.0);
    const bool spot = std::abs(e.k - 2.0) <= 1e-12 && std::abs(e.q_theta - 12.0) <= 1e-12 &&
                      std::abs(e.p_theta - 1.5) <= 1e-12 && std::abs(e.s - 12.0 / 11.0) <= 1e-12;
    verdict(9, "exponent algebra", worst <= 1e-12 && spot,
            std::to_string(cases) + " cases, worst identity defect " + fmt("%.2e", worst) + "; (3,3,6) -> k=" +
                fmt("%.15g", e.k) + " q=" + fmt("%.15g", e.q_theta) + " p=" + fmt("%.15g", e.p_theta) +
                " s=" + fmt("%.15g", e.s));
  }

  // 10. interpolated inequality
  {
    const auto e = exponent_set(3, 3.0, 6.0);
    const ScalarField c = radial_power({0.5, 0.5, 0.5}, 2.5);
    const auto cal = calibrate(laplace(c, constant_scalar(1.0)), g16, ladder_levels(), e, calibration_family(g16));
    const ScalarField f = polynomial({{1.0, {1, 0, 0}}, {-1.0, {2, 0, 0}}});
    const auto ladder = rough_c_solve(laplace(c, f), g16, ladder_levels());
    bool ok = cal.constants.calibrated;
    double worst = 0.0;
    for (const auto& lv : ladder.levels) {
      const auto v = check_interpolation(lv.report.solution, f, e, cal.constants);
      ok = ok && v.ok();
      worst = std::max(worst, v.margin);
    }
    verdict(10, "interpolated inequality", ok,
            "C1_eff " + fmt("%.5g", cal.constants.c1) + ", C2_eff " + fmt("%.5g", cal.constants.c2) +
                "; f = x(1-x) on 11 ladder levels, worst margin " + fmt("%.4f", worst));
  }

  // 11. determinism
  {
    const auto base = std::filesystem::temp_directory_path() / "divfree-acceptance";
    std::filesystem::remove_all(base);
    json doc = {{"suites", {"rough_c_ladder", "duality", "divfree"}},
                {"parallel", 2},
                {"grid", {{"cells", 8}}},
                {"fields",
                 {{"a", {{"kind", "identity"}}},
                  {"h", {{"kind", "constant"}, {"value", {1.0, 0.0, 0.0}}}},
                  {"c", {{"kind", "radial_power"}, {"center", {0.5, 0.5, 0.5}}, {"alpha", 2.5}}},
                  {"f", {{"kind", "trig"}, {"frequencies", {1, 1, 1}}}}}},
                {"rough_c_ladder", {{"levels", {1, 4, 16, 64, 256, 1024}}}}};
    std::vector<std::vector<std::pair<std::string, std::string>>> runs;
    for (int k = 0; k < 2; ++k) {
      auto cfg = parse_config(doc);
      cfg.output = base / ("run" + std::to_string(k));
      run_experiment(cfg);
      std::vector<std::pair<std::string, std::string>> files;
      for (const auto& entry : std::filesystem::directory_iterator(*cfg.output / "tables"))
        files.emplace_back(entry.path().filename().string(), read_all(entry.path()));
      std::sort(files.begin(), files.end());
      runs.push_back(std::move(files));
    }
    std::size_t bytes = 0;
    for (const auto& [_, text] : runs[0]) bytes += text.size();
    verdict(11, "determinism", !runs[0].empty() && runs[0] == runs[1],
            std::to_string(runs[0].size()) + " CSV files (" + std::to_string(bytes) +
                " bytes) from two runs with 2 worker threads " + (runs[0] == runs[1] ? "identical" : "differ"));
    std::filesystem::remove_all(base);
  }

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
