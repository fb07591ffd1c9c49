#pragma once

#include <optional>
#include <string>
#include <vector>

#include "divfree/fields.hpp"
#include "divfree/solver.hpp"
#include "divfree/space.hpp"

namespace divfree {

/// Positive density on all grid nodes, normalized so rho(x1) = 1.
struct InvariantDensity {
  GridSpec grid;
  std::vector<double> nodal;
  std::size_t x1 = 0;
  double min = 0.0;
  double max = 0.0;
  double harnack_ratio = 1.0;  // K1 = max / min
  /// Set when rho is supplied in closed form (value and gradient already
  /// scaled by the normalization).
  std::optional<Potential> exact;

  /// Q1 interpolant of the nodal values, or the closed form when present.
  ScalarField field() const;
  VectorField gradient() const;
};

/// Zero-flux discrete adjoint solve: find rho in the all-node Q1 space with
///   int <A^T grad rho + rho H, grad phi_i> dx = 0  for every node i != x1,
/// rho(x1) = 1. Defaults x1 to the node nearest the domain center.
/// Throws NumericalError{"density_positivity"} on a nonpositive node.
InvariantDensity compute_rho(const MatrixField& a, const VectorField& h, const GridSpec& grid,
                             std::optional<std::size_t> x1 = std::nullopt);

/// Wraps nodal values (e.g. read from CSV) after normalization at x1.
InvariantDensity density_from_nodal(const GridSpec& grid, std::vector<double> nodal,
                                    std::optional<std::size_t> x1 = std::nullopt);

/// Closed-form density rho = value / value(x1).
InvariantDensity exact_density(const GridSpec& grid, const Potential& rho,
                               std::optional<std::size_t> x1 = std::nullopt);

/// exp(-V) with gradient -exp(-V) grad V.
Potential boltzmann(const Potential& v);

/// B = H + A^T grad rho / rho, pointwise (cellwise Q1 gradient of rho).
VectorField make_drift_B(const InvariantDensity& rho, const MatrixField& a, const VectorField& h);

struct DivergenceResidual {
  double max_normalized = 0.0;  // max_i |int <rho B, grad phi_i>| / (||rho B|| ||grad phi_i||)
  std::size_t worst_node = 0;
  double rho_b_l2 = 0.0;
};

/// Tests rho B = A^T grad rho + rho H against every Q1 basis function
/// (boundary nodes included).
DivergenceResidual divergence_residual(const InvariantDensity& rho, const MatrixField& a, const VectorField& h);

struct TransformedProblem {
  Coefficients coefficients;  // (rho A, rho B, rho c, rho f)
  Coefficients original;
  DivergenceResidual residual;
  double tolerance = 1e-8;
  std::string provenance;
  bool residual_ok() const { return residual.max_normalized <= tolerance; }
};

TransformedProblem transform(const Coefficients& original, const InvariantDensity& rho, double tolerance = 1e-8);

/// max_i |<(T u - rho f), phi_i> - <(O u - f), rho phi_i>| over interior basis functions,
/// for transformed form T and original form O.
double test_function_identity(const TransformedProblem& t, const InvariantDensity& rho, const DiscreteFunction& u);

enum class DensitySource { computed, exact };

struct GapLevel {
  int cells = 0;
  double gap_h1 = 0.0;
  double u_h1 = 0.0;
  double harnack_ratio = 0.0;
  double divergence_residual = 0.0;
};

struct GapResult {
  std::vector<GapLevel> levels;
  bool decreasing = true;
  double observed_order = 0.0;  // last two levels
};

/// ||u_orig - u_transf||_{H^1} on each grid of the ladder (cells per axis on
/// the unit cube scaled to `base`). With DensitySource::exact the closed form
/// `exact_rho` is used instead of compute_rho.
GapResult equivalence_gap(const Coefficients& original, const GridSpec& base, const std::vector<int>& cells_ladder,
                          DensitySource source = DensitySource::computed,
                          const std::optional<Potential>& exact_rho = std::nullopt, const SolverOptions& options = {});

void write_density_csv(const std::string& path, const InvariantDensity& rho);
std::vector<double> read_nodal_csv(const std::string& path, std::size_t expected_rows, std::size_t columns = 1);

}  // namespace divfree
