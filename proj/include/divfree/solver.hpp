#pragma once

#include <memory>
#include <string>
#include <vector>

#include "divfree/fields.hpp"
#include "divfree/space.hpp"

namespace divfree {

/// The coefficient set (A, H, c) and data f of one problem.
struct Coefficients {
  MatrixField a;
  VectorField h;
  ScalarField c;
  ScalarField f;
};

struct SolverOptions {
  double inner_tol = 1e-10;
  double outer_tol = 1e-8;
  int max_iterations = 5000;
  int restart = 60;
};

/// Assembled B-form, mass matrix and load over one space.
struct DiscreteProblem {
  std::shared_ptr<const FemSpace> space;
  SparseOperator op;
  SparseOperator mass;
  Vector load;
  double gamma = 0.0;
  double lambda = 1.0;
  SplitConstant split;
  std::string label;
};

/// Assembles (A, H, c, f). gamma defaults to N^2/lambda from split_constant.
DiscreteProblem make_problem(std::shared_ptr<const FemSpace> space, const Coefficients& coefficients,
                             std::optional<double> gamma = std::nullopt);

struct SolveReport {
  DiscreteFunction solution;
  double residual_norm = 0.0;  // relative residual of the system actually solved
  int iterations = 0;
  std::string method;
  double weak_residual = 0.0;  // ||B u - psi|| / ||psi||
  int inner_iterations = 0;
  double spectral_radius = 0.0;
};

/// Discrete K: (B + gamma M) u = psi by preconditioned Krylov (CG when the
/// shifted matrix is symmetric, BiCGSTAB otherwise).
class ShiftedSolver {
 public:
  ShiftedSolver(const DiscreteProblem& problem, const SolverOptions& options = {});
  ~ShiftedSolver();
  ShiftedSolver(const ShiftedSolver&) = delete;
  ShiftedSolver& operator=(const ShiftedSolver&) = delete;

  /// Throws NumericalError{"no_convergence"} with the final residual.
  Vector apply(const Vector& psi, int* iterations = nullptr, double* residual = nullptr) const;
  bool symmetric() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SolveReport lax_milgram_solve(const DiscreteProblem& problem, const Vector& psi, const SolverOptions& options = {});

/// (I - gamma K J) u = K psi by restarted GMRES, one shifted solve per
/// application. gamma = 0 returns K psi directly.
SolveReport fredholm_solve(const DiscreteProblem& problem, const Vector& psi, const SolverOptions& options = {});

/// Sparse LU of the unshifted B, reusable across loads.
class DirectSolver {
 public:
  explicit DirectSolver(const DiscreteProblem& problem, const SolverOptions& options = {});
  ~DirectSolver();
  DirectSolver(const DirectSolver&) = delete;
  DirectSolver& operator=(const DirectSolver&) = delete;

  SolveReport solve(const Vector& psi) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// B u = load by sparse LU.
SolveReport direct_solve(const DiscreteProblem& problem, const SolverOptions& options = {});
SolveReport direct_solve(const DiscreteProblem& problem, const Vector& psi, const SolverOptions& options = {});

/// ||u - gamma K J u - K psi|| / ||K psi||.
double fixed_point_residual(const DiscreteProblem& problem, const Vector& u, const Vector& psi,
                            const SolverOptions& options = {});

struct LadderLevel {
  double level = 0.0;
  SolveReport report;
  double grad_l2 = 0.0;
  double linf = 0.0;
  double energy = 0.0;          // <load, u_n>
  double h1_difference = 0.0;   // ||u_n - u_prev||_{H^1}, 0 on the first level
  double c_min = 0.0;           // smallest sampled c_n
};

struct LadderResult {
  std::vector<LadderLevel> levels;
  DiscreteFunction limit;
  bool symmetric = false;
};

/// Solves with c_n = c ^ n for every level (sorted ascending). Levels are
/// independent and run on up to `parallel` threads.
/// Throws NumericalError{"truncation_unstable"} ("truncation sequence
/// unstable") on negative c samples, non-finite solutions, or, in the
/// symmetric case, an increase of <load, u_n> along the ladder.
LadderResult rough_c_solve(const Coefficients& coefficients, const GridSpec& grid, std::vector<double> ladder,
                           int parallel = 1, const SolverOptions& options = {});

struct Probe {
  std::vector<int> frequencies;
  ScalarField field;
};

/// prod_i sin(k_i pi (x_i - lo_i) / L_i) for the 8 lowest frequency vectors.
std::vector<Probe> default_probes(const GridSpec& grid);

struct ProbeValue {
  std::vector<int> frequencies;
  double integral = 0.0;  // w^T B v with B^T w = (phi, phi_i)
  double direct = 0.0;    // int phi v, for cross-checking
  double phi_l2 = 0.0;
};

/// Duality test of v = u1 - u2 against each probe.
std::vector<ProbeValue> duality_probe(const DiscreteProblem& problem, const DiscreteFunction& u1,
                                      const DiscreteFunction& u2, const std::vector<Probe>& probes);

}  // namespace divfree
