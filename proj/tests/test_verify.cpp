#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "divfree/verify.hpp"

using namespace divfree;

TEST_CASE("exponent spot values") {
  const auto a = exponent_set(3, 2.0, 7.0);
  CHECK(a.k == 1.0);
  CHECK(a.theta == 0.0);
  CHECK(a.q_theta == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(a.p_theta == doctest::Approx(1.2).epsilon(1e-15));

  const auto b = exponent_set(3, 3.0, 6.0);
  CHECK(std::abs(b.k - 2.0) <= 1e-15);
  CHECK(std::abs(b.theta - 0.5) <= 1e-15);
  CHECK(std::abs(b.q_theta - 12.0) <= 1e-12);
  CHECK(std::abs(b.p_theta - 1.5) <= 1e-15);
  CHECK(std::abs(b.s - 12.0 / 11.0) <= 1e-15);
  CHECK(std::abs(b.p1 - 2.0) <= 1e-15);

  const auto c = exponent_set(4, 4.0, 8.0);
  CHECK(std::abs(c.k - 3.0) <= 1e-15);
  CHECK(std::abs(c.q_theta - 12.0) <= 1e-12);
  CHECK(std::abs(c.p_theta - 2.0) <= 1e-15);
}

TEST_CASE("exponent identities across the sweep") {
  int count = 0;
  for (int d : {3, 4, 5}) {
    for (int i = 0; i < 9; ++i) {
      const double r = 2.0 + (d - 2.0) * i / 8.0;
      for (double p : {d + 1.0, 2.0 * d, 10.0 * d}) {
        const auto e = exponent_set(d, r, p);
        for (const auto& id : e.identities()) CHECK(id.defect <= 1e-12);
        CHECK(e.k >= 1.0);
        ++count;
      }
    }
  }
  CHECK(count == 81);
}

TEST_CASE("exponent range errors") {
  CHECK_THROWS_AS(exponent_set(2, 2.0, 6.0), std::invalid_argument);
  CHECK_THROWS_AS(exponent_set(3, 1.5, 6.0), std::invalid_argument);
  CHECK_THROWS_AS(exponent_set(3, 3.5, 6.0), std::invalid_argument);
  CHECK_THROWS_AS(exponent_set(3, 3.0, 3.0), std::invalid_argument);
}

TEST_CASE("energy check") {
  const auto space = build_space(GridSpec::unit_cube(3, 4));
  const DiscreteFunction zero(space, Vector::Zero(27));
  const auto v0 = check_energy(zero, constant_scalar(0.0), 1.0, 3);
  CHECK(v0.ok());
  CHECK(v0.lhs == 0.0);
  CHECK(v0.rhs == 0.0);

  const auto f1 = check_energy(zero, constant_scalar(1.0), 1.0, 3);
  CHECK(f1.rhs == doctest::Approx(4.0));
  CHECK(check_energy(zero, constant_scalar(1.0), 2.0, 3).rhs == doctest::Approx(2.0));

  const auto fine = build_space(GridSpec::unit_cube(3, 16));
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const Coefficients cf{identity_matrix(3), constant_vector({0, 0, 0}), constant_scalar(0.0),
                        trig_product(3.0 * pi2, {1, 1, 1})};
  const auto u = direct_solve(make_problem(fine, cf)).solution;
  const auto v = check_energy(u, cf.f, 1.0, 3);
  CHECK(v.ok());
  CHECK(v.margin < 1.0);
}

TEST_CASE("linf ratio and band") {
  const auto space = build_space(GridSpec::unit_cube(3, 4));
  const DiscreteFunction zero(space, Vector::Zero(27));
  CHECK(linf_ratio(zero, constant_scalar(0.0), 6.0) == 0.0);
  CHECK(check_linf_band({1.0, 1.01, 1.02, 1.0}).ok());
  CHECK_FALSE(check_linf_band({1.0, 1.0, 1.0, 1.2}).ok());
}

TEST_CASE("interpolation check") {
  const auto space = build_space(GridSpec::unit_cube(3, 8));
  const auto e = exponent_set(3, 3.0, 6.0);
  const DiscreteFunction zero(space, Vector::Zero(343));
  CHECK_THROWS_WITH_AS(check_interpolation(zero, constant_scalar(1.0), e, {}), "calibrate first", std::logic_error);
  const EffectiveConstants c{0.1, 0.2, true, 1};
  CHECK(check_interpolation(zero, constant_scalar(1.0), e, c).ok());

  // k = 1 is the L^6 / L^{6/5} bound with C1, bit for bit
  const auto e1 = exponent_set(3, 2.0, 6.0);
  const Coefficients cf{identity_matrix(3), constant_vector({0, 0, 0}), constant_scalar(0.0), constant_scalar(1.0)};
  const auto u = direct_solve(make_problem(space, cf)).solution;
  const auto v = check_interpolation(u, cf.f, e1, c);
  const auto direct = make_verdict("l6", norm(u, NormKind::lq, 6.0), c.c1 * lp_norm(cf.f, 1.2, space->grid()).value);
  CHECK(v.lhs == direct.lhs);
  CHECK(v.rhs == direct.rhs);
}

TEST_CASE("calibration envelopes dominate every sample") {
  const auto grid = GridSpec::unit_cube(3, 6);
  const auto e = exponent_set(3, 3.0, 6.0);
  const Coefficients cf{identity_matrix(3), constant_vector({0, 0, 0}), radial_power({0.5, 0.5, 0.5}, 2.5),
                        constant_scalar(1.0)};
  auto family = calibration_family(grid);
  CHECK(family.size() >= 6);
  // sines have kinks of |g|^p on their nodal planes and are slow to integrate; keep the fast members
  std::erase_if(family, [](const auto& m) { return m.first.rfind("sine", 0) == 0; });
  const auto cal = calibrate(cf, grid, {1.0, 16.0, 256.0}, e, family);
  CHECK(cal.constants.calibrated);
  CHECK(cal.samples.size() == 3 * family.size());
  for (const auto& s : cal.samples) {
    CHECK(s.ratio_c1 <= cal.constants.c1);
    CHECK(s.ratio_c2 <= cal.constants.c2);
  }
}

TEST_CASE("maximum principle diagnostic") {
  const auto space = build_space(GridSpec::unit_cube(3, 6));
  const Coefficients cf{identity_matrix(3), constant_vector({0, 0, 0}), constant_scalar(0.0), constant_scalar(-1.0)};
  const auto p = make_problem(space, cf);
  const auto u = direct_solve(p).solution;
  const auto r = max_principle_diagnostic(p, cf.f, u);
  CHECK(r.applicable);
  CHECK(r.verdict.ok());
  CHECK(r.max_u <= 0.0);

  const Coefficients zero_f{identity_matrix(3), constant_vector({0, 0, 0}), constant_scalar(0.0),
                            constant_scalar(0.0)};
  const auto pz = make_problem(space, zero_f);
  CHECK(max_principle_diagnostic(pz, zero_f.f, direct_solve(pz).solution).verdict.ok());

  const auto coarse = build_space(GridSpec::unit_cube(3, 3));
  const Coefficients strong{identity_matrix(3), constant_vector({40.0, 0, 0}), constant_scalar(0.0),
                            constant_scalar(-1.0)};
  const auto ps = make_problem(coarse, strong);
  const auto rs = max_principle_diagnostic(ps, strong.f, direct_solve(ps).solution);
  CHECK_FALSE(rs.applicable);
  CHECK(rs.verdict.status == VerdictStatus::not_applicable);
  CHECK(rs.positive_offdiagonals > 0);
}
