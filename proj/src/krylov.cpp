#include "divfree/krylov.hpp"

#include <cmath>
#include <vector>

namespace divfree {

GmresResult gmres(const LinearMap& apply, const Vector& b, const Vector& x0, const GmresOptions& opt) {
  GmresResult out;
  out.x = x0;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.x.setZero();
    out.converged = true;
    return out;
  }
  const Eigen::Index n = b.size();
  const int m = std::max(1, opt.restart);
  Vector r(n), w(n);
  std::vector<Vector> basis(m + 1, Vector(n));
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m + 1, m);
  Vector cs(m), sn(m), g(m + 1);

  while (out.iterations < opt.max_iterations) {
    apply(out.x, w);
    r = b - w;
    double beta = r.norm();
    out.relative_residual = beta / bnorm;
    if (out.relative_residual <= opt.tol) {
      out.converged = true;
      return out;
    }
    basis[0] = r / beta;
    g.setZero();
    g[0] = beta;
    hess.setZero();
    int k = 0;
    for (; k < m && out.iterations < opt.max_iterations; ++k) {
      ++out.iterations;
      apply(basis[k], w);
      for (int i = 0; i <= k; ++i) {
        hess(i, k) = basis[i].dot(w);
        w -= hess(i, k) * basis[i];
      }
      hess(k + 1, k) = w.norm();
      if (hess(k + 1, k) > 0.0) basis[k + 1] = w / hess(k + 1, k);
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * hess(i, k) + sn[i] * hess(i + 1, k);
        hess(i + 1, k) = -sn[i] * hess(i, k) + cs[i] * hess(i + 1, k);
        hess(i, k) = t;
      }
      const double den = std::hypot(hess(k, k), hess(k + 1, k));
      cs[k] = den == 0.0 ? 1.0 : hess(k, k) / den;
      sn[k] = den == 0.0 ? 0.0 : hess(k + 1, k) / den;
      hess(k, k) = den;
      hess(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) / bnorm <= opt.tol || hess(k, k) == 0.0) {
        ++k;
        break;
      }
    }
    // back substitution on the k x k triangle
    Vector y = hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    for (int i = 0; i < k; ++i) out.x += y[i] * basis[i];
  }
  apply(out.x, w);
  out.relative_residual = (b - w).norm() / bnorm;
  out.converged = out.relative_residual <= opt.tol;
  return out;
}

double spectral_radius_estimate(const LinearMap& apply, Eigen::Index n, int iterations) {
  Vector v = Vector::Ones(n).normalized();
  Vector w(n);
  double lambda = 0.0;
  for (int i = 0; i < iterations; ++i) {
    apply(v, w);
    lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return lambda;
}

}  // namespace divfree
