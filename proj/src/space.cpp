#include "divfree/space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace divfree {

FemSpace::FemSpace(GridSpec grid, BoundaryCondition bc)
    : grid_(std::move(grid)), bc_(bc) {
  grid_.validate();
  rule_ = make_cell_rule(grid_, grid_.quadrature_order);
  const std::size_t n = grid_.num_nodes();
  node_to_dof_.assign(n, -1);
  dof_to_node_.reserve(bc_ == BoundaryCondition::dirichlet ? grid_.num_interior_nodes() : n);
  for (std::size_t i = 0; i < n; ++i) {
    if (bc_ == BoundaryCondition::dirichlet && grid_.on_boundary(i)) continue;
    node_to_dof_[i] = static_cast<std::ptrdiff_t>(dof_to_node_.size());
    dof_to_node_.push_back(i);
  }
}

std::vector<double> FemSpace::to_nodal(const Vector& values) const {
  std::vector<double> nodal(num_nodes(), 0.0);
  for (std::size_t k = 0; k < size(); ++k) nodal[dof_to_node_[k]] = values[static_cast<Eigen::Index>(k)];
  return nodal;
}

Vector FemSpace::from_nodal(std::span<const double> nodal) const {
  Vector v(static_cast<Eigen::Index>(size()));
  for (std::size_t k = 0; k < size(); ++k) v[static_cast<Eigen::Index>(k)] = nodal[dof_to_node_[k]];
  return v;
}

Vector FemSpace::interpolate(const ScalarField& g) const {
  Vector v(static_cast<Eigen::Index>(size()));
  std::vector<double> x(dim());
  for (std::size_t k = 0; k < size(); ++k) {
    grid_.node_point(dof_to_node_[k], x);
    v[static_cast<Eigen::Index>(k)] = g(x);
  }
  return v;
}

std::shared_ptr<const FemSpace> build_space(const GridSpec& grid, BoundaryCondition bc) {
  return std::make_shared<const FemSpace>(grid, bc);
}

// ---------------------------------------------------------------------------

DiscreteFunction::DiscreteFunction(std::shared_ptr<const FemSpace> space, Vector values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != space_->size()) {
    throw std::invalid_argument("DiscreteFunction: expected " + std::to_string(space_->size()) +
                                " values, got " + std::to_string(values_.size()));
  }
  nodal_ = std::make_shared<const std::vector<double>>(space_->to_nodal(values_));
}

ScalarField DiscreteFunction::as_field() const {
  auto nodal = nodal_;
  auto space = space_;
  return ScalarField([space, nodal](std::span<const double> x) { return interpolate_q1(space->grid(), *nodal, x); },
                     "discrete");
}

VectorField DiscreteFunction::gradient_field() const {
  auto nodal = nodal_;
  auto space = space_;
  return VectorField(
      space_->dim(),
      [space, nodal](std::span<const double> x, std::span<double> out) {
        gradient_q1(space->grid(), *nodal, x, out);
      },
      "discrete_gradient");
}

// ---------------------------------------------------------------------------

double norm(const FemSpace& space, const Vector& u, NormKind kind, double q) {
  if (kind == NormKind::lq && !(q >= 1.0)) {
    throw std::invalid_argument("norm: exponent q must be >= 1");
  }
  const auto& grid = space.grid();
  const int d = grid.dim;
  const std::vector<double> nodal = space.to_nodal(u);
  const CellRule rule = make_cell_rule(grid, std::max(grid.quadrature_order, 3));
  const int corners = rule.corners;
  std::vector<std::size_t> nodes(corners);

  if (kind == NormKind::linf) {
    double m = 0.0;
    for (double v : nodal) m = std::max(m, std::abs(v));
    for (std::size_t c = 0; c < grid.num_cells(); ++c) {
      grid.cell_nodes(c, nodes);
      for (std::size_t k = 0; k < rule.size(); ++k) {
        double v = 0.0;
        for (int j = 0; j < corners; ++j) v += rule.value(k, j) * nodal[nodes[j]];
        m = std::max(m, std::abs(v));
      }
    }
    return m;
  }

  const double p = kind == NormKind::lq ? q : 2.0;
  double value_sum = 0.0;
  double grad_sum = 0.0;
  std::vector<double> g(d);
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    grid.cell_nodes(c, nodes);
    for (std::size_t k = 0; k < rule.size(); ++k) {
      double v = 0.0;
      std::fill(g.begin(), g.end(), 0.0);
      for (int j = 0; j < corners; ++j) {
        const double nv = nodal[nodes[j]];
        v += rule.value(k, j) * nv;
        const double* gj = rule.grad(k, j);
        for (int a = 0; a < d; ++a) g[a] += gj[a] * nv;
      }
      const double w = rule.weights[k];
      if (kind != NormKind::h1_semi) value_sum += w * std::pow(std::abs(v), p);
      if (kind == NormKind::h1_semi || kind == NormKind::h1) {
        double s = 0.0;
        for (double ga : g) s += ga * ga;
        grad_sum += w * s;
      }
    }
  }
  switch (kind) {
    case NormKind::l2:
      return std::sqrt(value_sum);
    case NormKind::lq:
      return std::pow(value_sum, 1.0 / p);
    case NormKind::h1_semi:
      return std::sqrt(grad_sum);
    case NormKind::h1:
      return std::sqrt(value_sum + grad_sum);
    default:
      return 0.0;
  }
}

double norm(const DiscreteFunction& u, NormKind kind, double q) { return norm(u.space(), u.values(), kind, q); }

// ---------------------------------------------------------------------------

namespace {

std::string where(const GridSpec& grid, std::size_t cell, std::span<const double> x) {
  std::ostringstream os;
  os << "cell " << cell << " at (";
  for (int a = 0; a < grid.dim; ++a) os << (a ? ", " : "") << x[a];
  os << ")";
  return os.str();
}

void require_finite(std::span<const double> values, const char* what, const GridSpec& grid, std::size_t cell,
                    std::span<const double> x) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericalError("non_finite_field", std::string("non-finite ") + what + " value in " + where(grid, cell, x));
    }
  }
}

}  // namespace

SparseOperator assemble_form(const FemSpace& space, const FormCoefficients& cf) {
  const auto& grid = space.grid();
  const auto& rule = space.rule();
  const int d = grid.dim;
  const int corners = rule.corners;
  const std::size_t nq = rule.size();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(grid.num_cells() * corners * corners);

  std::vector<std::size_t> nodes(corners);
  std::vector<double> x(d), dm(d * d), bv(d), fv(d), dg(corners * d);
  std::vector<double> local(corners * corners);
  bool symmetric = true;

  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    grid.cell_nodes(c, nodes);
    std::fill(local.begin(), local.end(), 0.0);
    bool cell_symmetric = true;
    // first pass over quadrature points decides whether the cell is symmetric
    for (std::size_t q = 0; q < nq; ++q) {
      quadrature_point(grid, rule, c, q, x);
      const double w = rule.weights[q];
      double r = 0.0;
      if (cf.diffusion) {
        (*cf.diffusion)(x, dm);
        require_finite(dm, "diffusion", grid, c, x);
        if (cf.transpose_diffusion) {
          for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) std::swap(dm[i * d + j], dm[j * d + i]);
        }
        for (int i = 0; i < d && cell_symmetric; ++i)
          for (int j = i + 1; j < d; ++j)
            if (dm[i * d + j] != dm[j * d + i]) cell_symmetric = false;
      }
      bool has_b = false;
      bool has_f = false;
      if (cf.advection) {
        (*cf.advection)(x, bv);
        require_finite(bv, "drift", grid, c, x);
        has_b = std::any_of(bv.begin(), bv.end(), [](double v) { return v != 0.0; });
      }
      if (cf.flux) {
        (*cf.flux)(x, fv);
        require_finite(fv, "flux", grid, c, x);
        has_f = std::any_of(fv.begin(), fv.end(), [](double v) { return v != 0.0; });
      }
      if (has_b || has_f) cell_symmetric = false;
      if (cf.reaction) {
        r = (*cf.reaction)(x);
        require_finite(std::span<const double>(&r, 1), "reaction", grid, c, x);
      }
      // D grad phi_j for every corner j
      if (cf.diffusion) {
        for (int j = 0; j < corners; ++j) {
          const double* gj = rule.grad(q, j);
          for (int a = 0; a < d; ++a) {
            double s = 0.0;
            for (int b = 0; b < d; ++b) s += dm[a * d + b] * gj[b];
            dg[j * d + a] = s;
          }
        }
      }
      for (int i = 0; i < corners; ++i) {
        const double* gi = rule.grad(q, i);
        const double vi = rule.value(q, i);
        for (int j = 0; j < corners; ++j) {
          const double* gj = rule.grad(q, j);
          const double vj = rule.value(q, j);
          double s = 0.0;
          if (cf.diffusion) {
            for (int a = 0; a < d; ++a) s += dg[j * d + a] * gi[a];
          }
          if (has_b) {
            double t = 0.0;
            for (int a = 0; a < d; ++a) t += bv[a] * gj[a];
            s += t * vi;
          }
          if (has_f) {
            double t = 0.0;
            for (int a = 0; a < d; ++a) t += fv[a] * gi[a];
            s += vj * t;
          }
          s += r * vj * vi;
          local[i * corners + j] += w * s;
        }
      }
    }
    if (cell_symmetric) {
      for (int i = 0; i < corners; ++i)
        for (int j = 0; j < i; ++j) local[i * corners + j] = local[j * corners + i];
    } else {
      symmetric = false;
    }
    for (int i = 0; i < corners; ++i) {
      const auto di = space.dof(nodes[i]);
      if (di < 0) continue;
      for (int j = 0; j < corners; ++j) {
        const auto dj = space.dof(nodes[j]);
        if (dj < 0) continue;
        triplets.emplace_back(static_cast<int>(di), static_cast<int>(dj), local[i * corners + j]);
      }
    }
  }

  SparseOperator op;
  const auto m = static_cast<Eigen::Index>(space.size());
  op.matrix.resize(m, m);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix.prune([](Eigen::Index, Eigen::Index, double v) { return v != 0.0; });
  op.matrix.makeCompressed();
  op.symmetric = symmetric;
  return op;
}

SparseOperator assemble(const FemSpace& space, const MatrixField& a, const VectorField& h,
                        const ScalarField& c) {
  FormCoefficients cf;
  cf.diffusion = &a;
  cf.advection = h.zero() ? nullptr : &h;
  cf.reaction = &c;
  return assemble_form(space, cf);
}

SparseOperator assemble_mass(const FemSpace& space) {
  const ScalarField one = constant_scalar(1.0);
  FormCoefficients cf;
  cf.reaction = &one;
  return assemble_form(space, cf);
}

SparseOperator assemble_stiffness(const FemSpace& space) {
  const MatrixField id = identity_matrix(space.dim());
  FormCoefficients cf;
  cf.diffusion = &id;
  return assemble_form(space, cf);
}

Vector assemble_load(const FemSpace& space, const ScalarField& g) {
  const auto& grid = space.grid();
  const auto& rule = space.rule();
  const int d = grid.dim;
  Vector load = Vector::Zero(static_cast<Eigen::Index>(space.size()));
  std::vector<std::size_t> nodes(rule.corners);
  std::vector<double> x(d);
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    grid.cell_nodes(c, nodes);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      quadrature_point(grid, rule, c, q, x);
      const double v = g(x);
      require_finite(std::span<const double>(&v, 1), "load", grid, c, x);
      const double wv = rule.weights[q] * v;
      for (int i = 0; i < rule.corners; ++i) {
        const auto di = space.dof(nodes[i]);
        if (di >= 0) load[di] += wv * rule.value(q, i);
      }
    }
  }
  return load;
}

Vector assemble_weighted_residual(const FemSpace& space, const MatrixField& a, const VectorField& h,
                                  const ScalarField& c, const ScalarField& f, const Vector& u,
                                  const ScalarField& weight, const VectorField& weight_gradient) {
  const auto& grid = space.grid();
  const auto& rule = space.rule();
  const int d = grid.dim;
  const int corners = rule.corners;
  const std::vector<double> nodal = space.to_nodal(u);
  Vector res = Vector::Zero(static_cast<Eigen::Index>(space.size()));
  std::vector<std::size_t> nodes(corners);
  std::vector<double> x(d), am(d * d), hv(d), gw(d), gu(d), agu(d);
  for (std::size_t cell = 0; cell < grid.num_cells(); ++cell) {
    grid.cell_nodes(cell, nodes);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      quadrature_point(grid, rule, cell, q, x);
      double uh = 0.0;
      std::fill(gu.begin(), gu.end(), 0.0);
      for (int j = 0; j < corners; ++j) {
        const double nv = nodal[nodes[j]];
        uh += rule.value(q, j) * nv;
        const double* gj = rule.grad(q, j);
        for (int k = 0; k < d; ++k) gu[k] += gj[k] * nv;
      }
      a(x, am);
      h(x, hv);
      weight_gradient(x, gw);
      const double wv = weight(x);
      const double cv = c(x);
      const double fv = f(x);
      double hgu = 0.0;
      for (int k = 0; k < d; ++k) {
        hgu += hv[k] * gu[k];
        double s = 0.0;
        for (int l = 0; l < d; ++l) s += am[k * d + l] * gu[l];
        agu[k] = s;
      }
      const double zero_order = hgu + cv * uh - fv;
      for (int i = 0; i < corners; ++i) {
        const auto di = space.dof(nodes[i]);
        if (di < 0) continue;
        const double vi = rule.value(q, i);
        const double* gi = rule.grad(q, i);
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += agu[k] * (vi * gw[k] + wv * gi[k]);
        s += zero_order * wv * vi;
        res[di] += rule.weights[q] * s;
      }
    }
  }
  return res;
}

}  // namespace divfree
