#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "divfree/grid.hpp"

namespace divfree {

/// Gauss-Legendre nodes and weights on [0, 1] (weights sum to 1).
struct GaussRule1D {
  std::vector<double> points;
  std::vector<double> weights;
};

GaussRule1D gauss_legendre(int order);

/// Tensor Gauss rule on the reference cell [0,1]^d.
struct TensorRule {
  int dim = 0;
  std::vector<double> points;   // size() * dim, point-major
  std::vector<double> weights;  // reference weights, sum to 1

  std::size_t size() const noexcept { return weights.size(); }
  std::span<const double> point(std::size_t q) const {
    return {points.data() + q * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

TensorRule tensor_gauss(int dim, int order);

/// Q1 basis tables at the quadrature points of a uniform grid cell.
/// Weights already include the cell volume, gradients are physical.
struct CellRule {
  int dim = 0;
  int corners = 0;
  TensorRule reference;
  std::vector<double> weights;  // [q]
  std::vector<double> values;   // [q * corners + k]
  std::vector<double> grads;    // [(q * corners + k) * dim + a]

  std::size_t size() const noexcept { return weights.size(); }
  double value(std::size_t q, int k) const { return values[q * corners + k]; }
  const double* grad(std::size_t q, int k) const { return &grads[(q * corners + k) * dim]; }
};

CellRule make_cell_rule(const GridSpec& grid, int order);

/// Physical coordinates of quadrature point q in the given cell.
void quadrature_point(const GridSpec& grid, const CellRule& rule, std::size_t cell, std::size_t q,
                      std::span<double> x);

struct AdaptiveOptions {
  double rel_tol = 1e-8;
  int max_depth = 12;
  std::size_t max_splits = 20000;
  int order = 4;
};

struct AdaptiveResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int depth = 0;              // deepest subdivision level used
  bool converged = false;     // error estimate below tolerance
  bool extrapolated = false;  // geometric tail correction applied to capped cells
  bool divergent = false;     // a capped cell shows non-decaying contributions
  double decay_ratio = 0.0;   // worst corner-child ratio observed on capped cells
};

/// Globally adaptive dyadic quadrature of f over the grid cells.
///
/// Every cell carries (Gauss, sum-of-children) estimates; the cell with the
/// largest disagreement is split until the total disagreement drops below
/// rel_tol * |value|, the split budget runs out, or cells hit max_depth.
/// A capped cell around a point singularity |x - x0|^-b behaves
/// homogeneously: its dominant child holds a fraction 2^(b - d) of it.
/// Fractions near or above one mean the integral diverges; smaller ones
/// give a closed-form geometric tail that is added back.
AdaptiveResult integrate_adaptive(const GridSpec& grid,
                                  const std::function<double(std::span<const double>)>& f,
                                  const AdaptiveOptions& options = {});

}  // namespace divfree
