#include "divfree/fields.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace divfree {

namespace {

std::string format_exponent(double p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

AdaptiveOptions norm_options(const GridSpec& grid, AdaptiveOptions opt) {
  opt.order = std::max(opt.order, grid.quadrature_order);
  return opt;
}

// Sup over a fixed sampling set: grid nodes plus Gauss points of every cell.
template <typename Eval>
double sample_sup(const GridSpec& grid, int order, Eval&& eval) {
  const int d = grid.dim;
  std::vector<double> x(d);
  double sup = 0.0;
  auto visit = [&](std::span<const double> p) {
    const double v = eval(p);
    if (!std::isfinite(v)) {
      throw NumericalError("divergent_norm", "norm infinite at exponent p=inf");
    }
    sup = std::max(sup, std::abs(v));
  };
  for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
    grid.node_point(n, x);
    visit(x);
  }
  const CellRule rule = make_cell_rule(grid, order);
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      quadrature_point(grid, rule, c, q, x);
      visit(x);
    }
  }
  return sup;
}

NormResult finite_norm(const std::function<double(std::span<const double>)>& magnitude, double p,
                       const GridSpec& grid, const AdaptiveOptions& opt) {
  const auto integrand = [&](std::span<const double> x) { return std::pow(magnitude(x), p); };
  const AdaptiveResult r = integrate_adaptive(grid, integrand, norm_options(grid, opt));
  if (r.divergent) {
    throw NumericalError("divergent_norm", "norm infinite at exponent p=" + format_exponent(p));
  }
  NormResult out;
  out.value = std::pow(std::max(r.value, 0.0), 1.0 / p);
  out.refinement_depth = r.depth;
  out.converged = r.converged;
  out.extrapolated = r.extrapolated;
  out.error_estimate = r.value > 0.0 ? r.error_estimate / r.value / p : 0.0;
  return out;
}

void check_exponent(double p) {
  if (!(p >= 1.0)) {
    throw std::invalid_argument("lp_norm: exponent must lie in [1, inf] (got " + format_exponent(p) + ")");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

ScalarField constant_scalar(double value) {
  ScalarField f([value](std::span<const double>) { return value; }, "constant");
  f.with_constant(value).with_nonnegative(value >= 0.0);
  return f;
}

VectorField constant_vector(std::vector<double> value) {
  const int d = static_cast<int>(value.size());
  const bool zero = std::all_of(value.begin(), value.end(), [](double v) { return v == 0.0; });
  VectorField h(d, [value](std::span<const double>, std::span<double> out) {
    std::copy(value.begin(), value.end(), out.begin());
  }, "constant");
  h.with_zero(zero);
  return h;
}

MatrixField identity_matrix(int dim, double scale) {
  return MatrixField(
      dim,
      [dim, scale](std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (int i = 0; i < dim; ++i) out[i * dim + i] = scale;
      },
      scale, std::abs(scale), "identity");
}

MatrixField constant_matrix(int dim, std::vector<double> entries) {
  if (entries.size() != static_cast<std::size_t>(dim * dim)) {
    throw std::invalid_argument("constant_matrix: expected d*d entries");
  }
  Eigen::MatrixXd a = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      entries.data(), dim, dim);
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  const double lambda = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff();
  const double bound = a.cwiseAbs().maxCoeff();
  return MatrixField(
      dim,
      [entries](std::span<const double>, std::span<double> out) {
        std::copy(entries.begin(), entries.end(), out.begin());
      },
      lambda, bound, "constant");
}

ScalarField polynomial(std::vector<Monomial> terms) {
  return ScalarField(
      [terms](std::span<const double> x) {
        double s = 0.0;
        for (const auto& t : terms) {
          double m = t.coefficient;
          for (std::size_t i = 0; i < t.powers.size(); ++i) {
            for (int k = 0; k < t.powers[i]; ++k) m *= x[i];
          }
          s += m;
        }
        return s;
      },
      "polynomial");
}

ScalarField trig_product(double amplitude, std::vector<int> frequencies) {
  return ScalarField(
      [amplitude, frequencies](std::span<const double> x) {
        double v = amplitude;
        for (std::size_t i = 0; i < frequencies.size(); ++i) {
          v *= std::sin(frequencies[i] * std::numbers::pi * x[i]);
        }
        return v;
      },
      "trig");
}

ScalarField radial_power(std::vector<double> center, double alpha, double scale) {
  ScalarField f(
      [center, alpha, scale](std::span<const double> x) {
        double r2 = 0.0;
        for (std::size_t i = 0; i < center.size(); ++i) {
          const double t = x[i] - center[i];
          r2 += t * t;
        }
        if (r2 == 0.0) return scale == 0.0 ? 0.0 : std::copysign(kInfinity, scale);
        return scale * std::pow(r2, -0.5 * alpha);
      },
      "radial_power");
  f.with_nonnegative(scale >= 0.0);
  return f;
}

Potential trig_potential(double amplitude, std::vector<int> frequencies) {
  const int d = static_cast<int>(frequencies.size());
  Potential p;
  p.value = trig_product(amplitude, frequencies);
  p.gradient = VectorField(
      d,
      [amplitude, frequencies, d](std::span<const double> x, std::span<double> out) {
        for (int j = 0; j < d; ++j) {
          double v = amplitude * frequencies[j] * std::numbers::pi *
                     std::cos(frequencies[j] * std::numbers::pi * x[j]);
          for (int i = 0; i < d; ++i) {
            if (i != j) v *= std::sin(frequencies[i] * std::numbers::pi * x[i]);
          }
          out[j] = v;
        }
      },
      "grad_trig");
  return p;
}

Potential polynomial_potential(int dim, std::vector<Monomial> terms) {
  Potential p;
  p.value = polynomial(terms);
  p.gradient = VectorField(
      dim,
      [terms, dim](std::span<const double> x, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (const auto& t : terms) {
          for (int j = 0; j < dim && j < static_cast<int>(t.powers.size()); ++j) {
            if (t.powers[j] == 0) continue;
            double m = t.coefficient * t.powers[j];
            for (std::size_t i = 0; i < t.powers.size(); ++i) {
              const int e = static_cast<int>(i) == j ? t.powers[i] - 1 : t.powers[i];
              for (int k = 0; k < e; ++k) m *= x[i];
            }
            out[j] += m;
          }
        }
      },
      "grad_polynomial");
  return p;
}

VectorField gradient_potential(const Potential& potential) { return potential.gradient; }

ScalarField tabulated_scalar(const GridSpec& grid, std::vector<double> nodal) {
  if (nodal.size() != grid.num_nodes()) {
    throw std::invalid_argument("tabulated field: expected " + std::to_string(grid.num_nodes()) +
                                " nodal values, got " + std::to_string(nodal.size()));
  }
  auto values = std::make_shared<const std::vector<double>>(std::move(nodal));
  return ScalarField(
      [grid, values](std::span<const double> x) { return interpolate_q1(grid, *values, x); }, "tabulated");
}

namespace {

// nodes x comps row table -> component-major tables
std::shared_ptr<const std::vector<std::vector<double>>> split_components(const GridSpec& grid,
                                                                         const std::vector<double>& rows,
                                                                         int comps) {
  const std::size_t n = grid.num_nodes();
  if (rows.size() != n * static_cast<std::size_t>(comps)) {
    throw std::invalid_argument("tabulated field: expected " + std::to_string(n) + " rows of " +
                                std::to_string(comps) + " values");
  }
  auto out = std::make_shared<std::vector<std::vector<double>>>(comps, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < comps; ++c) (*out)[c][i] = rows[i * comps + c];
  }
  return out;
}

}  // namespace

VectorField tabulated_vector(const GridSpec& grid, std::vector<double> nodal_rows) {
  const int d = grid.dim;
  auto comps = split_components(grid, nodal_rows, d);
  return VectorField(
      d,
      [grid, comps, d](std::span<const double> x, std::span<double> out) {
        for (int c = 0; c < d; ++c) out[c] = interpolate_q1(grid, (*comps)[c], x);
      },
      "tabulated");
}

MatrixField tabulated_matrix(const GridSpec& grid, std::vector<double> nodal_rows, double lambda,
                             double bound) {
  const int d = grid.dim;
  auto comps = split_components(grid, nodal_rows, d * d);
  return MatrixField(
      d,
      [grid, comps, d](std::span<const double> x, std::span<double> out) {
        for (int c = 0; c < d * d; ++c) out[c] = interpolate_q1(grid, (*comps)[c], x);
      },
      lambda, bound, "tabulated");
}

// ---------------------------------------------------------------------------

NormResult lp_norm(const ScalarField& g, double p, const GridSpec& grid, const AdaptiveOptions& opt) {
  check_exponent(p);
  if (auto c = g.constant()) {
    NormResult r;
    r.value = std::isinf(p) ? std::abs(*c) : std::abs(*c) * std::pow(grid.measure(), 1.0 / p);
    return r;
  }
  if (std::isinf(p)) {
    NormResult r;
    r.value = sample_sup(grid, std::max(opt.order, grid.quadrature_order),
                         [&](std::span<const double> x) { return g(x); });
    return r;
  }
  return finite_norm([&](std::span<const double> x) { return std::abs(g(x)); }, p, grid, opt);
}

NormResult lp_norm(const VectorField& h, double p, const GridSpec& grid, const AdaptiveOptions& opt) {
  check_exponent(p);
  if (h.zero()) return NormResult{};
  std::vector<double> buf(h.dim());
  const auto magnitude = [&](std::span<const double> x) {
    h(x, buf);
    double s = 0.0;
    for (double v : buf) s += v * v;
    return std::sqrt(s);
  };
  if (std::isinf(p)) {
    NormResult r;
    r.value = sample_sup(grid, std::max(opt.order, grid.quadrature_order), magnitude);
    return r;
  }
  return finite_norm(magnitude, p, grid, opt);
}

namespace {

struct TailTable {
  std::vector<double> magnitude;  // sorted descending
  std::vector<double> prefix;     // prefix[i] = sum_{j<i} w_j |H_j|^d
};

TailTable tail_table(const VectorField& h, const GridSpec& grid) {
  const int d = grid.dim;
  const CellRule rule = make_cell_rule(grid, grid.quadrature_order);
  std::vector<std::pair<double, double>> samples;
  samples.reserve(grid.num_cells() * rule.size());
  std::vector<double> x(d), hv(d);
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      quadrature_point(grid, rule, c, q, x);
      h(x, hv);
      double s = 0.0;
      for (double v : hv) s += v * v;
      const double m = std::sqrt(s);
      if (!std::isfinite(m)) {
        throw NumericalError("heavy_tail", "H tail too heavy at exponent d: non-finite |H| in cell " +
                                               std::to_string(c));
      }
      samples.emplace_back(m, rule.weights[q] * std::pow(m, d));
    }
  }
  std::stable_sort(samples.begin(), samples.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  TailTable t;
  t.magnitude.reserve(samples.size());
  t.prefix.assign(1, 0.0);
  for (const auto& [m, w] : samples) {
    t.magnitude.push_back(m);
    t.prefix.push_back(t.prefix.back() + w);
  }
  return t;
}

double tail_at(const TailTable& t, double level, int dim) {
  // number of samples with |H| >= level
  const auto it = std::partition_point(t.magnitude.begin(), t.magnitude.end(),
                                       [level](double m) { return m >= level; });
  const double mass = t.prefix[static_cast<std::size_t>(it - t.magnitude.begin())];
  return std::pow(mass, 2.0 / dim);
}

}  // namespace

double tail_functional(const VectorField& h, double level, const GridSpec& grid) {
  if (h.zero()) return 0.0;
  return tail_at(tail_table(h, grid), level, grid.dim);
}

double sobolev_factor(int dim) { return 2.0 * (dim - 1.0) / (dim - 2.0); }

double split_threshold(int dim, double lambda) {
  const double r = (dim - 2.0) / (dim - 1.0);
  return lambda * lambda / 16.0 * r * r;
}

SplitConstant split_constant(const VectorField& h, double lambda, const GridSpec& grid) {
  if (!(lambda > 0.0)) throw std::invalid_argument("split_constant: lambda must be positive");
  SplitConstant s;
  s.threshold = split_threshold(grid.dim, lambda);
  if (h.zero()) return s;
  const TailTable table = tail_table(h, grid);
  s.sup_estimate = table.magnitude.empty() ? 0.0 : table.magnitude.front();
  s.tail = tail_at(table, 0.0, grid.dim);
  if (s.tail <= s.threshold) return s;

  // T is nonincreasing in N and vanishes above the sampled sup.
  double lo = 0.0;
  double hi = s.sup_estimate * (1.0 + 1e-12) + std::numeric_limits<double>::min();
  if (tail_at(table, hi, grid.dim) > s.threshold) {
    throw NumericalError("heavy_tail", "H tail too heavy at exponent d");
  }
  for (int i = 0; i < 64; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (tail_at(table, mid, grid.dim) <= s.threshold) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  s.level = hi;
  s.lattice_step = hi - lo;
  s.tail = tail_at(table, hi, grid.dim);
  s.gamma = hi * hi / lambda;
  return s;
}

ScalarField truncate(const ScalarField& g, double level, TruncationMode mode) {
  if (!(level > 0.0)) throw std::invalid_argument("truncate: level must be positive");
  ScalarField out;
  if (mode == TruncationMode::upper) {
    out = ScalarField([g, level](std::span<const double> x) { return std::min(g(x), level); },
                      g.label() + "^" + std::to_string(level));
    out.with_nonnegative(g.nonnegative());
    if (auto c = g.constant()) out.with_constant(std::min(*c, level));
  } else {
    out = ScalarField([g, level](std::span<const double> x) { return std::clamp(g(x), -level, level); },
                      "clamp(" + g.label() + ")");
    out.with_nonnegative(g.nonnegative());
    if (auto c = g.constant()) out.with_constant(std::clamp(*c, -level, level));
  }
  out.with_exponent(kInfinity);
  return out;
}

double boundedness_constant(int dim, double bound, double h_norm_d, double c_norm_half_d) {
  const double s = sobolev_factor(dim);
  return dim * bound + s * h_norm_d + s * s * c_norm_half_d;
}

double boundedness_constant(const MatrixField& a, const VectorField& h, const ScalarField& c,
                            const GridSpec& grid) {
  const double hn = lp_norm(h, grid.dim, grid).value;
  const double cn = lp_norm(c, 0.5 * grid.dim, grid).value;
  return boundedness_constant(grid.dim, a.bound(), hn, cn);
}

EllipticitySample sample_ellipticity(const MatrixField& a, const GridSpec& grid) {
  const int d = grid.dim;
  EllipticitySample s;
  std::vector<double> x(d), m(d * d);
  Eigen::MatrixXd sym(d, d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  auto visit = [&](std::span<const double> p) {
    a(p, m);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        sym(i, j) = 0.5 * (m[i * d + j] + m[j * d + i]);
        s.max_entry = std::max(s.max_entry, std::abs(m[i * d + j]));
        if (m[i * d + j] != m[j * d + i]) s.symmetric = false;
      }
    }
    eig.compute(sym, Eigen::EigenvaluesOnly);
    s.min_eigenvalue = std::min(s.min_eigenvalue, eig.eigenvalues().minCoeff());
  };
  for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
    grid.node_point(n, x);
    visit(x);
  }
  const CellRule rule = make_cell_rule(grid, grid.quadrature_order);
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      quadrature_point(grid, rule, c, q, x);
      visit(x);
    }
  }
  s.consistent = s.min_eigenvalue >= a.lambda() * (1.0 - 1e-12) && s.max_entry <= a.bound() * (1.0 + 1e-12);
  return s;
}

}  // namespace divfree
