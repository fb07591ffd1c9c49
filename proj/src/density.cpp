#include "divfree/density.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace divfree {

namespace {

std::size_t default_x1(const GridSpec& grid, std::optional<std::size_t> x1) {
  if (x1) {
    if (*x1 >= grid.num_nodes()) throw std::invalid_argument("x1: node index out of range");
    return *x1;
  }
  return grid.nearest_node(grid.center());
}

void finish(InvariantDensity& rho) {
  rho.min = kInfinity;
  rho.max = -kInfinity;
  for (std::size_t i = 0; i < rho.nodal.size(); ++i) {
    const double v = rho.nodal[i];
    if (!(v > 0.0)) {
      std::vector<double> x(rho.grid.dim);
      rho.grid.node_point(i, x);
      std::ostringstream os;
      os << "density positivity violated at node " << i << " (";
      for (int a = 0; a < rho.grid.dim; ++a) os << (a ? ", " : "") << x[a];
      os << "): rho = " << v;
      throw NumericalError("density_positivity", os.str());
    }
    rho.min = std::min(rho.min, v);
    rho.max = std::max(rho.max, v);
  }
  rho.harnack_ratio = rho.max / rho.min;
}

}  // namespace

ScalarField InvariantDensity::field() const {
  if (exact) return exact->value;
  return tabulated_scalar(grid, nodal);
}

VectorField InvariantDensity::gradient() const {
  if (exact) return exact->gradient;
  auto values = std::make_shared<const std::vector<double>>(nodal);
  const GridSpec g = grid;
  return VectorField(
      grid.dim, [g, values](std::span<const double> x, std::span<double> out) { gradient_q1(g, *values, x, out); },
      "grad_rho");
}

InvariantDensity compute_rho(const MatrixField& a, const VectorField& h, const GridSpec& grid,
                             std::optional<std::size_t> x1) {
  if (h.zero()) {
    // constants solve the adjoint identity exactly
    InvariantDensity rho;
    rho.grid = grid;
    rho.x1 = default_x1(grid, x1);
    rho.nodal.assign(grid.num_nodes(), 1.0);
    finish(rho);
    return rho;
  }
  const auto space = build_space(grid, BoundaryCondition::natural);
  FormCoefficients cf;
  cf.diffusion = &a;
  cf.transpose_diffusion = true;
  cf.flux = &h;
  const SparseOperator g = assemble_form(*space, cf);

  InvariantDensity rho;
  rho.grid = grid;
  rho.x1 = default_x1(grid, x1);
  const auto row = static_cast<Eigen::Index>(rho.x1);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(g.matrix.nonZeros()) + 1);
  for (Eigen::Index i = 0; i < g.matrix.outerSize(); ++i) {
    if (i == row) continue;
    for (SparseMatrix::InnerIterator it(g.matrix, i); it; ++it) {
      triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  triplets.emplace_back(static_cast<int>(row), static_cast<int>(row), 1.0);
  Eigen::SparseMatrix<double> m(g.matrix.rows(), g.matrix.cols());
  m.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success) {
    throw NumericalError("singular", "compute_rho: singular adjoint system (" + lu.lastErrorMessage() + ")");
  }
  Vector rhs = Vector::Zero(m.rows());
  rhs[row] = 1.0;
  const Vector sol = lu.solve(rhs);
  rho.nodal.assign(sol.data(), sol.data() + sol.size());
  rho.nodal[rho.x1] = 1.0;
  finish(rho);
  return rho;
}

InvariantDensity density_from_nodal(const GridSpec& grid, std::vector<double> nodal, std::optional<std::size_t> x1) {
  if (nodal.size() != grid.num_nodes()) {
    throw std::invalid_argument("density: expected " + std::to_string(grid.num_nodes()) + " nodal values, got " +
                                std::to_string(nodal.size()));
  }
  InvariantDensity rho;
  rho.grid = grid;
  rho.x1 = default_x1(grid, x1);
  const double s = nodal[rho.x1];
  if (!(s > 0.0)) throw NumericalError("density_positivity", "density positivity violated at the normalization node");
  for (double& v : nodal) v /= s;
  rho.nodal = std::move(nodal);
  rho.nodal[rho.x1] = 1.0;
  finish(rho);
  return rho;
}

InvariantDensity exact_density(const GridSpec& grid, const Potential& p, std::optional<std::size_t> x1) {
  InvariantDensity rho;
  rho.grid = grid;
  rho.x1 = default_x1(grid, x1);
  std::vector<double> x(grid.dim);
  grid.node_point(rho.x1, x);
  const double s = p.value(x);
  if (!(s > 0.0)) throw NumericalError("density_positivity", "density positivity violated at the normalization node");
  const ScalarField value = p.value;
  const VectorField grad = p.gradient;
  Potential scaled{ScalarField([value, s](std::span<const double> y) { return value(y) / s; }, "rho_exact"),
                   VectorField(
                       grid.dim,
                       [grad, s](std::span<const double> y, std::span<double> out) {
                         grad(y, out);
                         for (double& o : out) o /= s;
                       },
                       "grad_rho_exact")};
  rho.nodal.resize(grid.num_nodes());
  for (std::size_t i = 0; i < grid.num_nodes(); ++i) {
    grid.node_point(i, x);
    rho.nodal[i] = scaled.value(x);
  }
  rho.nodal[rho.x1] = 1.0;
  rho.exact = std::move(scaled);
  finish(rho);
  return rho;
}

Potential boltzmann(const Potential& v) {
  const ScalarField value = v.value;
  const VectorField grad = v.gradient;
  const int d = grad.dim();
  return {ScalarField([value](std::span<const double> x) { return std::exp(-value(x)); }, "exp(-V)"),
          VectorField(
              d,
              [value, grad](std::span<const double> x, std::span<double> out) {
                grad(x, out);
                const double e = std::exp(-value(x));
                for (double& o : out) o *= -e;
              },
              "grad exp(-V)")};
}

VectorField make_drift_B(const InvariantDensity& rho, const MatrixField& a, const VectorField& h) {
  const ScalarField r = rho.field();
  const VectorField gr = rho.gradient();
  const int d = rho.grid.dim;
  return VectorField(
      d,
      [r, gr, a, h, d](std::span<const double> x, std::span<double> out) {
        std::vector<double> m(d * d), g(d);
        a(x, m);
        gr(x, g);
        h(x, out);
        const double rv = r(x);
        for (int i = 0; i < d; ++i) {
          double s = 0.0;
          for (int j = 0; j < d; ++j) s += m[j * d + i] * g[j];
          out[i] += s / rv;
        }
      },
      "B");
}

DivergenceResidual divergence_residual(const InvariantDensity& rho, const MatrixField& a, const VectorField& h) {
  const auto space = build_space(rho.grid, BoundaryCondition::natural);
  const ScalarField r = rho.field();
  const VectorField gr = rho.gradient();
  const int d = rho.grid.dim;
  const auto& rule = space->rule();
  const auto& grid = space->grid();
  const int corners = rule.corners;

  Vector res = Vector::Zero(static_cast<Eigen::Index>(space->size()));
  Vector grad_sq = Vector::Zero(static_cast<Eigen::Index>(space->size()));
  double rb_sq = 0.0;
  std::vector<std::size_t> nodes(corners);
  std::vector<double> x(d), m(d * d), g(d), hv(d), rb(d);
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    grid.cell_nodes(c, nodes);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      quadrature_point(grid, rule, c, q, x);
      a(x, m);
      gr(x, g);
      h(x, hv);
      const double rv = r(x);
      double s2 = 0.0;
      for (int i = 0; i < d; ++i) {
        double s = rv * hv[i];
        for (int j = 0; j < d; ++j) s += m[j * d + i] * g[j];
        rb[i] = s;
        s2 += s * s;
      }
      const double w = rule.weights[q];
      rb_sq += w * s2;
      for (int k = 0; k < corners; ++k) {
        const auto dof = space->dof(nodes[k]);
        const double* gk = rule.grad(q, k);
        double dot = 0.0;
        double gg = 0.0;
        for (int i = 0; i < d; ++i) {
          dot += rb[i] * gk[i];
          gg += gk[i] * gk[i];
        }
        res[dof] += w * dot;
        grad_sq[dof] += w * gg;
      }
    }
  }
  DivergenceResidual out;
  out.rho_b_l2 = std::sqrt(rb_sq);
  for (Eigen::Index i = 0; i < res.size(); ++i) {
    const double scale = out.rho_b_l2 * std::sqrt(grad_sq[i]);
    const double v = scale == 0.0 ? std::abs(res[i]) : std::abs(res[i]) / scale;
    if (v > out.max_normalized) {
      out.max_normalized = v;
      out.worst_node = static_cast<std::size_t>(i);
    }
  }
  return out;
}

TransformedProblem transform(const Coefficients& original, const InvariantDensity& rho, double tolerance) {
  TransformedProblem t;
  t.original = original;
  t.tolerance = tolerance;
  const ScalarField r = rho.field();
  const int d = rho.grid.dim;
  const MatrixField a = original.a;
  const VectorField b = make_drift_B(rho, original.a, original.h);
  const ScalarField c = original.c;
  const ScalarField f = original.f;
  t.coefficients.a = MatrixField(
      d,
      [a, r](std::span<const double> x, std::span<double> out) {
        a(x, out);
        const double rv = r(x);
        for (double& o : out) o *= rv;
      },
      a.lambda() * rho.min, a.bound() * rho.max, "rho*" + a.label());
  t.coefficients.h = VectorField(
      d,
      [b, r](std::span<const double> x, std::span<double> out) {
        b(x, out);
        const double rv = r(x);
        for (double& o : out) o *= rv;
      },
      "rho*B");
  t.coefficients.c = ScalarField([c, r](std::span<const double> x) { return r(x) * c(x); }, "rho*" + c.label());
  t.coefficients.c.with_nonnegative(c.nonnegative());
  t.coefficients.f = ScalarField([f, r](std::span<const double> x) { return r(x) * f(x); }, "rho*" + f.label());
  if (original.h.zero() && rho.harnack_ratio == 1.0) t.coefficients.h.with_zero();

  t.residual = divergence_residual(rho, original.a, original.h);
  std::ostringstream os;
  os << "transformed from (" << a.label() << ", " << original.h.label() << ", " << c.label() << ", " << f.label()
     << ") with " << (rho.exact ? "closed-form" : "computed") << " rho, K1 = " << rho.harnack_ratio
     << ", divergence residual " << t.residual.max_normalized;
  if (!t.residual_ok()) os << " (warning: above tolerance " << tolerance << ")";
  t.provenance = os.str();
  return t;
}

double test_function_identity(const TransformedProblem& t, const InvariantDensity& rho, const DiscreteFunction& u) {
  const FemSpace& space = u.space();
  const auto& tc = t.coefficients;
  const auto op = assemble(space, tc.a, tc.h, tc.c);
  const Vector lhs = op.matrix * u.values() - assemble_load(space, tc.f);
  const auto& o = t.original;
  const Vector rhs =
      assemble_weighted_residual(space, o.a, o.h, o.c, o.f, u.values(), rho.field(), rho.gradient());
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

GapResult equivalence_gap(const Coefficients& original, const GridSpec& base, const std::vector<int>& cells_ladder,
                          DensitySource source, const std::optional<Potential>& exact_rho,
                          const SolverOptions& options) {
  if (source == DensitySource::exact && !exact_rho) {
    throw std::invalid_argument("equivalence_gap: exact density requested but none supplied");
  }
  GapResult out;
  for (int n : cells_ladder) {
    GridSpec g = base;
    std::fill(g.cells.begin(), g.cells.end(), n);
    g.validate();
    const auto space = build_space(g);
    const InvariantDensity rho =
        source == DensitySource::exact ? exact_density(g, *exact_rho) : compute_rho(original.a, original.h, g);
    const TransformedProblem t = transform(original, rho);
    const auto uo = direct_solve(make_problem(space, original, 0.0), options);
    const auto ut = direct_solve(make_problem(space, t.coefficients, 0.0), options);
    GapLevel lv;
    lv.cells = n;
    lv.gap_h1 = norm(*space, uo.solution.values() - ut.solution.values(), NormKind::h1);
    lv.u_h1 = norm(uo.solution, NormKind::h1);
    lv.harnack_ratio = rho.harnack_ratio;
    lv.divergence_residual = t.residual.max_normalized;
    out.levels.push_back(lv);
  }
  for (std::size_t i = 1; i < out.levels.size(); ++i) {
    if (!(out.levels[i].gap_h1 < out.levels[i - 1].gap_h1)) out.decreasing = false;
  }
  if (out.levels.size() >= 2) {
    const auto& a = out.levels[out.levels.size() - 2];
    const auto& b = out.levels.back();
    if (a.gap_h1 > 0.0 && b.gap_h1 > 0.0) {
      out.observed_order = std::log(a.gap_h1 / b.gap_h1) / std::log(static_cast<double>(b.cells) / a.cells);
    }
  }
  return out;
}

void write_density_csv(const std::string& path, const InvariantDensity& rho) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  char buf[32];
  for (double v : rho.nodal) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf << '\n';
  }
}

std::vector<double> read_nodal_csv(const std::string& path, std::size_t expected_rows, std::size_t columns) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument(path + ": cannot open");
  std::vector<double> out;
  out.reserve(expected_rows * columns);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::size_t cols = 0;
    double v;
    while (ls >> v) {
      out.push_back(v);
      ++cols;
    }
    if (cols != columns) {
      throw std::invalid_argument(path + ": row " + std::to_string(rows + 1) + " has " + std::to_string(cols) +
                                  " columns, expected " + std::to_string(columns));
    }
    ++rows;
  }
  if (rows != expected_rows) {
    throw std::invalid_argument(path + ": " + std::to_string(rows) + " rows, grid has " +
                                std::to_string(expected_rows) + " nodes");
  }
  return out;
}

}  // namespace divfree
