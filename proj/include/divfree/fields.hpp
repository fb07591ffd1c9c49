#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "divfree/grid.hpp"
#include "divfree/quadrature.hpp"

namespace divfree {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// x -> g(x) in R, with declared integrability exponent and sign.
class ScalarField {
 public:
  using Fn = std::function<double(std::span<const double>)>;

  ScalarField() = default;
  explicit ScalarField(Fn fn, std::string label = "scalar") : fn_(std::move(fn)), label_(std::move(label)) {}

  double operator()(std::span<const double> x) const { return fn_(x); }
  const Fn& function() const { return fn_; }
  const std::string& label() const { return label_; }

  double exponent() const { return exponent_; }
  ScalarField& with_exponent(double s) {
    exponent_ = s;
    return *this;
  }
  bool nonnegative() const { return nonnegative_; }
  ScalarField& with_nonnegative(bool v = true) {
    nonnegative_ = v;
    return *this;
  }
  /// Set for fields known to be a constant (enables exact shortcuts).
  std::optional<double> constant() const { return constant_; }
  ScalarField& with_constant(double v) {
    constant_ = v;
    return *this;
  }

 private:
  Fn fn_;
  std::string label_ = "scalar";
  double exponent_ = kInfinity;
  bool nonnegative_ = false;
  std::optional<double> constant_;
};

/// x -> H(x) in R^d.
class VectorField {
 public:
  using Fn = std::function<void(std::span<const double>, std::span<double>)>;

  VectorField() = default;
  VectorField(int dim, Fn fn, std::string label = "vector")
      : dim_(dim), fn_(std::move(fn)), label_(std::move(label)) {}

  int dim() const { return dim_; }
  void operator()(std::span<const double> x, std::span<double> out) const { fn_(x, out); }
  const std::string& label() const { return label_; }

  double exponent() const { return exponent_; }
  VectorField& with_exponent(double p) {
    exponent_ = p;
    return *this;
  }
  bool zero() const { return zero_; }
  VectorField& with_zero(bool v = true) {
    zero_ = v;
    return *this;
  }

 private:
  int dim_ = 0;
  Fn fn_;
  std::string label_ = "vector";
  double exponent_ = kInfinity;
  bool zero_ = false;
};

/// x -> A(x) in R^{d x d}, row-major output. Declared ellipticity lambda
/// and entry bound M.
class MatrixField {
 public:
  using Fn = std::function<void(std::span<const double>, std::span<double>)>;

  MatrixField() = default;
  MatrixField(int dim, Fn fn, double lambda, double bound, std::string label = "matrix")
      : dim_(dim), fn_(std::move(fn)), lambda_(lambda), bound_(bound), label_(std::move(label)) {}

  int dim() const { return dim_; }
  void operator()(std::span<const double> x, std::span<double> out) const { fn_(x, out); }
  double lambda() const { return lambda_; }
  double bound() const { return bound_; }
  const std::string& label() const { return label_; }

 private:
  int dim_ = 0;
  Fn fn_;
  double lambda_ = 1.0;
  double bound_ = 1.0;
  std::string label_ = "matrix";
};

// ---------------------------------------------------------------------------
// Families

ScalarField constant_scalar(double value);
VectorField constant_vector(std::vector<double> value);
/// scale * I
MatrixField identity_matrix(int dim, double scale = 1.0);
/// Constant matrix, row-major; lambda and M are taken from the matrix itself.
MatrixField constant_matrix(int dim, std::vector<double> entries);

struct Monomial {
  double coefficient = 1.0;
  std::vector<int> powers;
};
ScalarField polynomial(std::vector<Monomial> terms);

/// amplitude * prod_i sin(k_i * pi * x_i)
ScalarField trig_product(double amplitude, std::vector<int> frequencies);

/// scale * |x - center|^(-alpha); +inf at the center itself.
ScalarField radial_power(std::vector<double> center, double alpha, double scale = 1.0);

/// Scalar potential together with its analytic gradient.
struct Potential {
  ScalarField value;
  VectorField gradient;
};
Potential trig_potential(double amplitude, std::vector<int> frequencies);
Potential polynomial_potential(int dim, std::vector<Monomial> terms);
/// H = grad V
VectorField gradient_potential(const Potential& potential);

/// Nodal tables interpolated multilinearly on the grid (axis 0 fastest).
ScalarField tabulated_scalar(const GridSpec& grid, std::vector<double> nodal);
VectorField tabulated_vector(const GridSpec& grid, std::vector<double> nodal_rows);  // nodes x d
MatrixField tabulated_matrix(const GridSpec& grid, std::vector<double> nodal_rows, double lambda,
                             double bound);  // nodes x d^2

// ---------------------------------------------------------------------------
// Norms and constants

struct NormResult {
  double value = 0.0;
  int refinement_depth = 0;
  bool converged = true;
  bool extrapolated = false;
  double error_estimate = 0.0;
};

/// ||g||_{L^p(U)} for p in [1, inf]. Singular integrands are resolved by
/// adaptive dyadic subdivision; a divergent integral raises
/// NumericalError{"divergent_norm"} ("norm infinite at exponent p").
NormResult lp_norm(const ScalarField& g, double p, const GridSpec& grid, const AdaptiveOptions& opt = {});
/// Euclidean pointwise norm, then L^p.
NormResult lp_norm(const VectorField& h, double p, const GridSpec& grid, const AdaptiveOptions& opt = {});

/// T(N) = (int 1_{|H| >= N} |H|^d dx)^(2/d) on the grid's quadrature points.
double tail_functional(const VectorField& h, double level, const GridSpec& grid);

struct SplitConstant {
  double level = 0.0;  // N
  double gamma = 0.0;  // N^2 / lambda
  double tail = 0.0;   // T(N)
  double threshold = 0.0;
  double lattice_step = 0.0;
  double sup_estimate = 0.0;
};

double split_threshold(int dim, double lambda);

/// Smallest N on a 64-step bisection lattice over [0, sup|H|] with
/// T(N) <= (lambda^2 / 16) ((d-2)/(d-1))^2.
SplitConstant split_constant(const VectorField& h, double lambda, const GridSpec& grid);

enum class TruncationMode { upper, symmetric };

/// upper: g ^ n; symmetric: (g ^ n) v (-n).
ScalarField truncate(const ScalarField& g, double level, TruncationMode mode = TruncationMode::upper);

/// K = d M + 2(d-1)/(d-2) ||H||_{L^d} + 4(d-1)^2/(d-2)^2 ||c||_{L^{d/2}}.
double boundedness_constant(int dim, double bound, double h_norm_d, double c_norm_half_d);
double boundedness_constant(const MatrixField& a, const VectorField& h, const ScalarField& c,
                            const GridSpec& grid);

/// 2(d-1)/(d-2): constant of the Sobolev inequality used throughout.
double sobolev_factor(int dim);

struct EllipticitySample {
  double min_eigenvalue = kInfinity;  // of the symmetric part
  double max_entry = 0.0;
  bool symmetric = true;
  bool consistent = true;  // declared lambda and M respected at every sample
};

/// Spot-checks (3) at every grid quadrature point and node.
EllipticitySample sample_ellipticity(const MatrixField& a, const GridSpec& grid);

}  // namespace divfree
