#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "divfree/quadrature.hpp"

using namespace divfree;

namespace {

// 3/(3-b) * int_0^1 int_0^1 (1+s^2+t^2)^(-b/2) ds dt equals the integral of
// |x|^-b over the unit cube (radial integration along rays from the corner).
// The double integral is smooth and is done here with a plain product
// midpoint rule plus Richardson, independent of the library's Gauss code.
double corner_oracle(double b) {
  auto mid = [b](int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double u = (i + 0.5) / n;
        const double v = (j + 0.5) / n;
        s += std::pow(1.0 + u * u + v * v, -0.5 * b);
      }
    }
    return s / (static_cast<double>(n) * n);
  };
  const double coarse = mid(400);
  const double fine = mid(800);
  return 3.0 / (3.0 - b) * (fine + (fine - coarse) / 3.0);
}

}  // namespace

TEST_CASE("gauss-legendre exactness") {
  for (int n = 1; n <= 8; ++n) {
    const auto r = gauss_legendre(n);
    double sum = 0.0;
    for (double w : r.weights) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.points[i], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
  CHECK_THROWS(gauss_legendre(0));
}

TEST_CASE("cell rule basis tables") {
  const auto g = GridSpec::unit_cube(3, 4);
  const auto rule = make_cell_rule(g, 2);
  CHECK(rule.size() == 8);
  double vol = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    vol += rule.weights[q];
    double s = 0.0;
    double gs = 0.0;
    for (int k = 0; k < rule.corners; ++k) {
      s += rule.value(q, k);
      gs += rule.grad(q, k)[1];
    }
    CHECK(s == doctest::Approx(1.0));
    CHECK(gs == doctest::Approx(0.0));
  }
  CHECK(vol == doctest::Approx(1.0 / 64.0));
}

TEST_CASE("adaptive quadrature: smooth integrand") {
  const auto g = GridSpec::unit_cube(3, 2);
  const auto r = integrate_adaptive(g, [](std::span<const double> x) {
    return std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]) * std::sin(std::numbers::pi * x[2]);
  });
  const double exact = std::pow(2.0 / std::numbers::pi, 3);
  CHECK(r.converged);
  CHECK_FALSE(r.divergent);
  CHECK(r.value == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("adaptive quadrature: integrable corner singularity") {
  const auto g = GridSpec::unit_cube(3, 2);
  for (double b : {1.0, 1.5, 2.5}) {
    CAPTURE(b);
    const double exact = corner_oracle(b);
    const auto r = integrate_adaptive(g, [b](std::span<const double> x) {
      const double rr = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      return rr == 0.0 ? INFINITY : std::pow(rr, -b);
    });
    CHECK_FALSE(r.divergent);
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-5));
  }
}

TEST_CASE("adaptive quadrature: divergent singularity is flagged") {
  const auto g = GridSpec::unit_cube(3, 2);
  const auto r = integrate_adaptive(g, [](std::span<const double> x) {
    const double dx = x[0] - 0.5, dy = x[1] - 0.5, dz = x[2] - 0.5;
    const double rr = std::sqrt(dx * dx + dy * dy + dz * dz);
    return rr == 0.0 ? INFINITY : std::pow(rr, -3.0);
  });
  CHECK(r.divergent);
}
