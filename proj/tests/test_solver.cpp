#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "divfree/krylov.hpp"
#include "divfree/solver.hpp"

using namespace divfree;

namespace {

Coefficients laplace(ScalarField f) {
  return {identity_matrix(3), constant_vector({0.0, 0.0, 0.0}), constant_scalar(0.0), std::move(f)};
}

Coefficients drift(double h) {
  return {identity_matrix(3), constant_vector({h, 0.0, 0.0}), constant_scalar(0.0), trig_product(1.0, {1, 1, 1})};
}

double rel_h1(const FemSpace& s, const Vector& a, const Vector& b) {
  return norm(s, a - b, NormKind::h1) / norm(s, b, NormKind::h1);
}

}  // namespace

TEST_CASE("gmres on a small nonsymmetric system") {
  Eigen::MatrixXd a(3, 3);
  a << 4, 1, 0, -1, 3, 1, 0, 2, 5;
  const Vector b = Vector::Ones(3);
  LinearMap op = [&](const Vector& x, Vector& y) { y = a * x; };
  const auto r = gmres(op, b, Vector::Zero(3), {1e-14, 50, 2});
  CHECK(r.converged);
  const Vector exact = a.partialPivLu().solve(b);
  CHECK((r.x - exact).norm() < 1e-12);
}

TEST_CASE("zero data gives zero solutions") {
  const auto space = build_space(GridSpec::unit_cube(3, 4));
  const auto p = make_problem(space, drift(1.0));
  const Vector zero = Vector::Zero(27);
  CHECK(lax_milgram_solve(p, zero).solution.values().norm() == 0.0);
  CHECK(fredholm_solve(p, zero).solution.values().norm() == 0.0);
  CHECK(direct_solve(p, zero).solution.values().norm() == 0.0);
}

TEST_CASE("lax-milgram: manufactured solution and linearity") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  std::vector<double> err;
  for (int n : {4, 8, 16}) {
    const auto space = build_space(GridSpec::unit_cube(3, n));
    const auto p = make_problem(space, laplace(trig_product(3.0 * pi2, {1, 1, 1})));
    CHECK(p.gamma == 0.0);
    const auto r = lax_milgram_solve(p, p.load);
    CHECK(r.residual_norm <= 1e-10);
    const auto uh = r.solution.as_field();
    const auto exact = trig_product(1.0, {1, 1, 1});
    err.push_back(lp_norm(ScalarField([&](std::span<const double> x) { return uh(x) - exact(x); }), 2.0,
                          space->grid(), {1e-10, 0, 0, 4})
                      .value);
    if (n == 8) {
      const auto r2 = lax_milgram_solve(p, Vector(2.0 * p.load));
      CHECK((r2.solution.values() - 2.0 * r.solution.values()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  CHECK(std::log2(err[1] / err[2]) >= 1.8);
}

TEST_CASE("fredholm collapses to lax-milgram when gamma = 0") {
  const auto space = build_space(GridSpec::unit_cube(3, 8));
  const auto p = make_problem(space, laplace(constant_scalar(1.0)));
  const auto a = lax_milgram_solve(p, p.load);
  const auto b = fredholm_solve(p, p.load);
  CHECK((a.solution.values() - b.solution.values()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("fredholm agrees with the direct solve on a drift case") {
  const auto space = build_space(GridSpec::unit_cube(3, 8));
  const auto p = make_problem(space, drift(1.0));
  CHECK(p.gamma > 1.0);
  CHECK(p.gamma == p.split.level * p.split.level / p.lambda);
  const auto f = fredholm_solve(p, p.load);
  const auto d = direct_solve(p);
  CHECK(rel_h1(*space, f.solution.values(), d.solution.values()) <= 1e-8);
  CHECK(f.weak_residual <= 1e-8);
  // (alpha) <=> (beta): the direct solution satisfies the fixed-point form
  CHECK(fixed_point_residual(p, d.solution.values(), p.load) <= 1e-8);
}

TEST_CASE("non-convergence carries the final residual") {
  const auto space = build_space(GridSpec::unit_cube(3, 4));
  auto p = make_problem(space, drift(1.0));
  SolverOptions o;
  o.inner_tol = 1e-30;
  o.max_iterations = 2;
  CHECK_THROWS_WITH_AS(lax_milgram_solve(p, p.load, o), doctest::Contains("final residual"), NumericalError);
}

TEST_CASE("direct solve: energy minimizer and maximum principle") {
  const auto space = build_space(GridSpec::unit_cube(3, 6));
  const auto p = make_problem(space, laplace(constant_scalar(1.0)));
  CHECK(p.op.symmetric);
  const auto r = direct_solve(p);
  const Vector& u = r.solution.values();
  auto energy = [&](const Vector& v) { return 0.5 * v.dot(p.op.matrix * v) - p.load.dot(v); };
  const double e0 = energy(u);
  for (int i = 0; i < static_cast<int>(u.size()); i += 7) {
    Vector v = u;
    v[i] += 1e-3;
    CHECK(energy(v) > e0);
    v[i] -= 2e-3;
    CHECK(energy(v) > e0);
  }
  CHECK(u.minCoeff() >= -1e-8 * u.cwiseAbs().maxCoeff());
}

TEST_CASE("ladder with bounded c: inactive truncation gives identical solutions") {
  Coefficients cf = laplace(constant_scalar(1.0));
  cf.c = constant_scalar(2.0);
  const auto r = rough_c_solve(cf, GridSpec::unit_cube(3, 6), {1.0, 4.0, 8.0, 2.0});
  REQUIRE(r.levels.size() == 4);
  CHECK(r.levels[0].level == 1.0);
  CHECK(r.levels[2].report.solution.values() == r.levels[1].report.solution.values());
  CHECK(r.levels[3].report.solution.values() == r.levels[1].report.solution.values());
  CHECK(r.levels[0].energy > r.levels[1].energy);
}

TEST_CASE("ladder with singular c inside the domain") {
  Coefficients cf = laplace(trig_product(1.0, {1, 1, 1}));
  cf.c = radial_power({0.5, 0.5, 0.5}, 2.5);
  const auto grid = GridSpec::unit_cube(3, 8);
  std::vector<double> ladder;
  for (double n = 1; n <= 1024; n *= 2) ladder.push_back(n);
  const auto serial = rough_c_solve(cf, grid, ladder);
  const auto par = rough_c_solve(cf, grid, ladder, 3);
  const double fnorm = lp_norm(cf.f, 1.2, grid).value;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    CHECK(serial.levels[i].grad_l2 <= 4.0 * fnorm);
    CHECK(serial.levels[i].report.solution.values() == par.levels[i].report.solution.values());
    if (i >= 1) CHECK(serial.levels[i].linf <= serial.levels[i - 1].linf);
  }
}

TEST_CASE("ladder with singular c at a boundary corner") {
  Coefficients cf = laplace(trig_product(1.0, {1, 1, 1}));
  cf.c = radial_power({0.0, 0.0, 0.0}, 2.5);
  std::vector<double> ladder;
  for (double n = 1; n <= 1024; n *= 2) ladder.push_back(n);
  const auto r = rough_c_solve(cf, GridSpec::unit_cube(3, 8), ladder);
  for (std::size_t i = 2; i < ladder.size(); ++i) CHECK(r.levels[i].h1_difference < r.levels[i - 1].h1_difference);
}

TEST_CASE("negative c is rejected by the ladder") {
  Coefficients cf = laplace(constant_scalar(1.0));
  cf.c = constant_scalar(-0.5);
  CHECK_THROWS_WITH_AS(rough_c_solve(cf, GridSpec::unit_cube(3, 4), {1.0, 2.0}),
                       doctest::Contains("truncation sequence unstable"), NumericalError);
}

TEST_CASE("duality probe") {
  const auto space = build_space(GridSpec::unit_cube(3, 8));
  const auto p = make_problem(space, drift(1.0));
  const auto probes = default_probes(space->grid());
  REQUIRE(probes.size() == 8);
  CHECK(probes[0].frequencies == std::vector<int>{1, 1, 1});
  CHECK(probes[1].frequencies == std::vector<int>{1, 1, 2});
  CHECK(probes[3].frequencies == std::vector<int>{2, 1, 1});
  CHECK(probes[7].frequencies == std::vector<int>{1, 1, 3});

  const auto d = direct_solve(p);
  const auto same = duality_probe(p, d.solution, d.solution, probes);
  for (const auto& v : same) CHECK(v.integral == 0.0);

  const auto f = fredholm_solve(p, p.load);
  const double u_l2 = norm(d.solution, NormKind::l2);
  for (const auto& v : duality_probe(p, d.solution, f.solution, probes)) {
    CHECK(std::abs(v.integral) <= 1e-8 * v.phi_l2 * u_l2);
  }

  const DiscreteFunction planted(space, d.solution.values() + space->interpolate(trig_product(1.0, {1, 1, 1})));
  double best = 0.0;
  for (const auto& v : duality_probe(p, planted, d.solution, probes)) {
    CHECK(std::abs(v.integral - v.direct) <= 1e-12);
    best = std::max(best, std::abs(v.integral));
  }
  CHECK(best > 1e-3);
}
