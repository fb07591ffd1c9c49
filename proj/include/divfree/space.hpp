#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "divfree/fields.hpp"
#include "divfree/grid.hpp"
#include "divfree/quadrature.hpp"

namespace divfree {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class BoundaryCondition {
  dirichlet,  // boundary nodes constrained to zero (H^{1,2}_0 proxy)
  natural,    // every node is a degree of freedom
};

/// Conforming Q1 space on a structured grid.
class FemSpace {
 public:
  explicit FemSpace(GridSpec grid, BoundaryCondition bc = BoundaryCondition::dirichlet);

  const GridSpec& grid() const noexcept { return grid_; }
  int dim() const noexcept { return grid_.dim; }
  BoundaryCondition boundary() const noexcept { return bc_; }
  const CellRule& rule() const noexcept { return rule_; }

  std::size_t size() const noexcept { return dof_to_node_.size(); }
  std::size_t num_nodes() const noexcept { return node_to_dof_.size(); }
  /// -1 for constrained nodes.
  std::ptrdiff_t dof(std::size_t node) const { return node_to_dof_[node]; }
  std::size_t node(std::size_t dof) const { return dof_to_node_[dof]; }

  /// Extend dof values to all grid nodes (constrained nodes get 0).
  std::vector<double> to_nodal(const Vector& values) const;
  /// Restrict nodal values to the dofs.
  Vector from_nodal(std::span<const double> nodal) const;
  /// Nodal interpolant of g restricted to the dofs.
  Vector interpolate(const ScalarField& g) const;

 private:
  GridSpec grid_;
  BoundaryCondition bc_;
  CellRule rule_;
  std::vector<std::ptrdiff_t> node_to_dof_;
  std::vector<std::size_t> dof_to_node_;
};

std::shared_ptr<const FemSpace> build_space(const GridSpec& grid,
                                            BoundaryCondition bc = BoundaryCondition::dirichlet);

/// Nodal coefficients over the dofs of a space.
class DiscreteFunction {
 public:
  DiscreteFunction() = default;
  DiscreteFunction(std::shared_ptr<const FemSpace> space, Vector values);

  const FemSpace& space() const { return *space_; }
  const std::shared_ptr<const FemSpace>& space_ptr() const { return space_; }
  const Vector& values() const { return values_; }

  /// Continuous Q1 field view (gradient is taken cellwise).
  ScalarField as_field() const;
  VectorField gradient_field() const;

 private:
  std::shared_ptr<const FemSpace> space_;
  Vector values_;
  std::shared_ptr<const std::vector<double>> nodal_;
};

enum class NormKind { l2, lq, linf, h1_semi, h1 };

/// Quadrature approximation of the requested norm of u. For lq pass q >= 1.
double norm(const DiscreteFunction& u, NormKind kind, double q = 2.0);
double norm(const FemSpace& space, const Vector& u, NormKind kind, double q = 2.0);

struct SparseOperator {
  SparseMatrix matrix;
  bool symmetric = false;

  Eigen::Index rows() const { return matrix.rows(); }
};

/// Generic second-order form
///   a(u, v) = int <D grad u, grad v> + <b, grad u> v + u <f, grad v> + r u v dx
/// with D (optionally transposed) the diffusion, b the advection, f the flux
/// vector and r the reaction. Entry (i, j) is a(phi_j, phi_i).
struct FormCoefficients {
  const MatrixField* diffusion = nullptr;
  bool transpose_diffusion = false;
  const VectorField* advection = nullptr;
  const VectorField* flux = nullptr;
  const ScalarField* reaction = nullptr;
};

SparseOperator assemble_form(const FemSpace& space, const FormCoefficients& coefficients);

/// B(phi_j, phi_i) = int <A grad phi_j, grad phi_i> + <H, grad phi_j> phi_i + c phi_j phi_i.
SparseOperator assemble(const FemSpace& space, const MatrixField& a, const VectorField& h,
                        const ScalarField& c);

SparseOperator assemble_mass(const FemSpace& space);
SparseOperator assemble_stiffness(const FemSpace& space);

/// Entry i = int g phi_i dx.
Vector assemble_load(const FemSpace& space, const ScalarField& g);

/// Entry i = int g (w phi_i) dx for a weight w given with its gradient;
/// used to test against products rho * phi_i outside the Q1 space.
Vector assemble_weighted_residual(const FemSpace& space, const MatrixField& a, const VectorField& h,
                                  const ScalarField& c, const ScalarField& f, const Vector& u,
                                  const ScalarField& weight, const VectorField& weight_gradient);

}  // namespace divfree
