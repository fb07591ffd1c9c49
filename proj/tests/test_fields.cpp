#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "divfree/fields.hpp"

using namespace divfree;

namespace {

// int over the unit cube of |x - center|^-b, center = cube center:
// 8 corner octants of side 1/2, each (1/2)^(3-b) times the unit-corner value.
double centered_oracle(double b) {
  const int n = 800;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = (i + 0.5) / n;
      const double v = (j + 0.5) / n;
      s += std::pow(1.0 + u * u + v * v, -0.5 * b);
    }
  }
  s /= static_cast<double>(n) * n;
  return 8.0 * std::pow(0.5, 3.0 - b) * 3.0 / (3.0 - b) * s;
}

}  // namespace

TEST_CASE("norms of constants") {
  const auto g = GridSpec::unit_cube(3, 4);
  for (double p : {1.0, 1.5, 2.0, 6.0, kInfinity}) {
    CHECK(lp_norm(constant_scalar(1.0), p, g).value == doctest::Approx(1.0));
  }
  CHECK(lp_norm(constant_vector({1.0, 0.0, 0.0}), 3.0, g).value == doctest::Approx(1.0));
  CHECK(lp_norm(constant_vector({3.0, 4.0, 0.0}), 2.0, g).value == doctest::Approx(5.0));
  CHECK_THROWS_AS(lp_norm(constant_scalar(1.0), 0.5, g), std::invalid_argument);
}

TEST_CASE("norm of a smooth field") {
  const auto g = GridSpec::unit_cube(3, 4);
  const auto s = trig_product(1.0, {1, 1, 1});
  CHECK(lp_norm(s, 2.0, g).value == doctest::Approx(std::sqrt(0.125)).epsilon(1e-7));
  CHECK(lp_norm(s, kInfinity, g).value <= 1.0);
}

TEST_CASE("singular radial field: finite at p=1, divergent at p=6/5") {
  const auto g = GridSpec::unit_cube(3, 4);
  const auto c = radial_power({0.5, 0.5, 0.5}, 2.5);
  const auto r1 = lp_norm(c, 1.0, g);
  CHECK(r1.value == doctest::Approx(centered_oracle(2.5)).epsilon(1e-4));
  CHECK(r1.refinement_depth > 0);
  try {
    lp_norm(c, 1.2, g);
    FAIL("expected divergence");
  } catch (const NumericalError& e) {
    CHECK(e.kind() == "divergent_norm");
    CHECK(std::string(e.what()).find("norm infinite at exponent p") != std::string::npos);
  }
}

TEST_CASE("split constant") {
  const auto g = GridSpec::unit_cube(3, 4);
  const auto zero = split_constant(constant_vector({0.0, 0.0, 0.0}), 1.0, g);
  CHECK(zero.level == 0.0);
  CHECK(zero.gamma == 0.0);

  // threshold at d=3, lambda=1 is (1/16)(1/2)^2 = 1/64; T(0) = h^2 on the unit cube
  CHECK(split_threshold(3, 1.0) == doctest::Approx(1.0 / 64.0));
  const auto small = split_constant(constant_vector({0.1, 0.0, 0.0}), 1.0, g);
  CHECK(small.level == 0.0);

  const double h = 1.0;
  const auto big = split_constant(constant_vector({h, 0.0, 0.0}), 1.0, g);
  CHECK(big.level > h);
  CHECK(big.level <= h + big.lattice_step * (1.0 + 1e-12) + 1e-15);
  CHECK(big.gamma == big.level * big.level);
  CHECK(big.tail <= big.threshold);

  // nonincreasing tail
  const auto lin = VectorField(3, [](std::span<const double> x, std::span<double> out) {
    out[0] = 4.0 * x[0];
    out[1] = 0.0;
    out[2] = 0.0;
  });
  double prev = INFINITY;
  for (double n = 0.0; n <= 4.5; n += 0.25) {
    const double t = tail_functional(lin, n, g);
    CHECK(t <= prev);
    prev = t;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("truncation") {
  const std::vector<double> x{0.1, 0.2, 0.3};
  CHECK(truncate(constant_scalar(5.0), 3.0)(x) == 3.0);
  CHECK(truncate(constant_scalar(-5.0), 3.0, TruncationMode::symmetric)(x) == -3.0);

  const auto c = radial_power({0.5, 0.5, 0.5}, 2.5);
  const auto t = truncate(c, 10.0);
  const double radius = std::pow(10.0, -0.4);
  const std::vector<double> inside{0.5 + 0.9 * radius, 0.5, 0.5};
  const std::vector<double> outside{0.5 + 1.1 * radius, 0.5, 0.5};
  CHECK(t(inside) == 10.0);
  CHECK(t(outside) == c(outside));
  CHECK(t(outside) < 10.0);
  CHECK(t.exponent() == kInfinity);
}

TEST_CASE("truncated L1 norms increase to the full norm") {
  const auto g = GridSpec::unit_cube(3, 4);
  const auto c = radial_power({0.5, 0.5, 0.5}, 2.5);
  const double full = lp_norm(c, 1.0, g).value;
  // kinks on the truncation sphere: a small split budget is enough here
  const AdaptiveOptions opt{1e-6, 12, 500, 4};
  double prev = 0.0;
  for (double n : {1.0, 4.0, 16.0, 64.0, 256.0}) {
    const double v = lp_norm(truncate(c, n), 1.0, g, opt).value;
    CHECK(v >= prev);
    CHECK(v <= full * (1.0 + 1e-6));
    prev = v;
  }
}

TEST_CASE("boundedness constant") {
  CHECK(boundedness_constant(3, 1.0, 0.0, 0.0) == doctest::Approx(3.0));
  CHECK(boundedness_constant(3, 1.0, 1.0, 0.0) == doctest::Approx(7.0));
  CHECK(boundedness_constant(3, 1.0, 0.0, 1.0) == doctest::Approx(19.0));
  CHECK(sobolev_factor(3) == doctest::Approx(4.0));
  const auto g = GridSpec::unit_cube(3, 4);
  CHECK(boundedness_constant(identity_matrix(3), constant_vector({1.0, 0.0, 0.0}), constant_scalar(0.0), g) ==
        doctest::Approx(7.0));
}

TEST_CASE("ellipticity sampling") {
  const auto g = GridSpec::unit_cube(3, 2);
  const auto e = sample_ellipticity(constant_matrix(3, {2.0, 1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 2.0}), g);
  CHECK(e.min_eigenvalue == doctest::Approx(1.5));
  CHECK(e.max_entry == doctest::Approx(2.0));
  CHECK_FALSE(e.symmetric);
  CHECK(e.consistent);
}

TEST_CASE("gradient potential matches finite differences") {
  const auto v = trig_potential(1.0, {2, 2, 2});
  std::vector<double> x{0.13, 0.37, 0.71}, g(3);
  v.gradient(x, g);
  for (int a = 0; a < 3; ++a) {
    auto xp = x, xm = x;
    xp[a] += 1e-6;
    xm[a] -= 1e-6;
    CHECK(g[a] == doctest::Approx((v.value(xp) - v.value(xm)) / 2e-6).epsilon(1e-6));
  }
}
