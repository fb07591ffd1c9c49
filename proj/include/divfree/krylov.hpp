#pragma once

#include <functional>

#include "divfree/space.hpp"

namespace divfree {

using LinearMap = std::function<void(const Vector&, Vector&)>;

struct GmresOptions {
  double tol = 1e-8;  // relative to ||b||
  int max_iterations = 500;
  int restart = 60;
};

struct GmresResult {
  Vector x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Restarted GMRES(m) for a matrix-free operator, modified Gram-Schmidt
/// with Givens rotations. The true residual is recomputed at every restart.
GmresResult gmres(const LinearMap& apply, const Vector& b, const Vector& x0, const GmresOptions& options = {});

/// Power iteration estimate of the spectral radius of a linear map.
double spectral_radius_estimate(const LinearMap& apply, Eigen::Index n, int iterations = 30);

}  // namespace divfree
