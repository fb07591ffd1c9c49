#include "divfree/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

#include "divfree/krylov.hpp"
#include "divfree/log.hpp"

namespace divfree {

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;
using LU = Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>;

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

double relative(double num, double den) { return den == 0.0 ? num : num / den; }

void factorize(LU& lu, const ColMatrix& m, const char* what) {
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success) {
    throw NumericalError("singular", std::string(what) + ": sparse LU breakdown (" + lu.lastErrorMessage() + ")");
  }
}

}  // namespace

DiscreteProblem make_problem(std::shared_ptr<const FemSpace> space, const Coefficients& cf,
                             std::optional<double> gamma) {
  DiscreteProblem p;
  p.space = std::move(space);
  p.lambda = cf.a.lambda();
  p.op = assemble(*p.space, cf.a, cf.h, cf.c);
  p.mass = assemble_mass(*p.space);
  p.load = assemble_load(*p.space, cf.f);
  if (gamma) {
    p.gamma = *gamma;
    p.split.threshold = split_threshold(p.space->dim(), p.lambda);
  } else {
    p.split = split_constant(cf.h, p.lambda, p.space->grid());
    p.gamma = p.split.gamma;
  }
  p.label = cf.a.label() + "|" + cf.h.label() + "|" + cf.c.label() + "|" + cf.f.label();
  return p;
}

// ---------------------------------------------------------------------------

struct ShiftedSolver::Impl {
  SparseMatrix shifted;
  bool symmetric = false;
  SolverOptions options;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> bicg;
};

ShiftedSolver::ShiftedSolver(const DiscreteProblem& problem, const SolverOptions& options)
    : impl_(std::make_unique<Impl>()) {
  impl_->options = options;
  impl_->symmetric = problem.op.symmetric;
  if (problem.gamma != 0.0) {
    impl_->shifted = problem.op.matrix + problem.gamma * problem.mass.matrix;
  } else {
    impl_->shifted = problem.op.matrix;
  }
  if (impl_->symmetric) {
    impl_->cg.setTolerance(options.inner_tol);
    impl_->cg.setMaxIterations(options.max_iterations);
    impl_->cg.compute(impl_->shifted);
  } else {
    impl_->bicg.setTolerance(options.inner_tol);
    impl_->bicg.setMaxIterations(options.max_iterations);
    impl_->bicg.compute(impl_->shifted);
  }
}

ShiftedSolver::~ShiftedSolver() = default;

bool ShiftedSolver::symmetric() const { return impl_->symmetric; }

Vector ShiftedSolver::apply(const Vector& psi, int* iterations, double* residual) const {
  if (psi.norm() == 0.0) {
    if (iterations) *iterations = 0;
    if (residual) *residual = 0.0;
    return Vector::Zero(psi.size());
  }
  Vector u;
  Eigen::ComputationInfo info;
  int its = 0;
  if (impl_->symmetric) {
    u = impl_->cg.solve(psi);
    info = impl_->cg.info();
    its = static_cast<int>(impl_->cg.iterations());
  } else {
    u = impl_->bicg.solve(psi);
    info = impl_->bicg.info();
    its = static_cast<int>(impl_->bicg.iterations());
  }
  const double res = relative((psi - impl_->shifted * u).norm(), psi.norm());
  if (info != Eigen::Success || !std::isfinite(res)) {
    throw NumericalError("no_convergence", "shifted solve did not converge after " + std::to_string(its) +
                                               " iterations, final residual " + sci(res));
  }
  if (iterations) *iterations = its;
  if (residual) *residual = res;
  return u;
}

SolveReport lax_milgram_solve(const DiscreteProblem& problem, const Vector& psi, const SolverOptions& options) {
  ShiftedSolver k(problem, options);
  SolveReport r;
  Vector u = k.apply(psi, &r.iterations, &r.residual_norm);
  r.inner_iterations = r.iterations;
  r.method = k.symmetric() ? "lax_milgram_cg" : "lax_milgram_bicgstab";
  if (problem.gamma == 0.0) {
    r.weak_residual = r.residual_norm;
  } else {
    r.weak_residual = relative((problem.op.matrix * u - psi).norm(), psi.norm());
  }
  r.solution = DiscreteFunction(problem.space, std::move(u));
  return r;
}

SolveReport fredholm_solve(const DiscreteProblem& problem, const Vector& psi, const SolverOptions& options) {
  ShiftedSolver k(problem, options);
  SolveReport r;
  int its = 0;
  Vector kpsi = k.apply(psi, &its);
  r.inner_iterations = its;
  r.method = "fredholm_gmres";
  if (problem.gamma == 0.0) {
    r.residual_norm = 0.0;
    r.weak_residual = relative((problem.op.matrix * kpsi - psi).norm(), psi.norm());
    r.solution = DiscreteFunction(problem.space, std::move(kpsi));
    return r;
  }
  const double gamma = problem.gamma;
  int inner_total = its;
  LinearMap op = [&](const Vector& x, Vector& y) {
    int n = 0;
    y = x - gamma * k.apply(problem.mass.matrix * x, &n);
    inner_total += n;
  };
  GmresOptions go;
  go.tol = options.outer_tol;
  go.max_iterations = options.max_iterations;
  go.restart = options.restart;
  const GmresResult g = gmres(op, kpsi, Vector::Zero(kpsi.size()), go);
  if (!g.converged) {
    LinearMap kj = [&](const Vector& x, Vector& y) { y = gamma * k.apply(problem.mass.matrix * x); };
    const double rho = spectral_radius_estimate(kj, kpsi.size());
    throw NumericalError("fredholm_stalled", "Fredholm iteration stalled after " + std::to_string(g.iterations) +
                                                 " iterations, residual " + sci(g.relative_residual) +
                                                 ", spectral radius estimate of gamma*K*J " + sci(rho));
  }
  r.iterations = g.iterations;
  r.residual_norm = g.relative_residual;
  r.inner_iterations = inner_total;
  r.weak_residual = relative((problem.op.matrix * g.x - psi).norm(), psi.norm());
  r.solution = DiscreteFunction(problem.space, g.x);
  log_debug("fredholm: " + std::to_string(g.iterations) + " outer, " + std::to_string(inner_total) +
            " inner iterations, weak residual " + sci(r.weak_residual));
  return r;
}

struct DirectSolver::Impl {
  const DiscreteProblem* problem = nullptr;
  SolverOptions options;
  LU lu;
};

DirectSolver::DirectSolver(const DiscreteProblem& problem, const SolverOptions& options)
    : impl_(std::make_unique<Impl>()) {
  impl_->problem = &problem;
  impl_->options = options;
  const ColMatrix m = problem.op.matrix;
  factorize(impl_->lu, m, "direct_solve");
}

DirectSolver::~DirectSolver() = default;

SolveReport DirectSolver::solve(const Vector& psi) const {
  const DiscreteProblem& problem = *impl_->problem;
  SolveReport r;
  r.method = "sparse_lu";
  if (psi.norm() == 0.0) {
    r.solution = DiscreteFunction(problem.space, Vector::Zero(psi.size()));
    return r;
  }
  Vector u = impl_->lu.solve(psi);
  r.residual_norm = relative((problem.op.matrix * u - psi).norm(), psi.norm());
  r.weak_residual = r.residual_norm;
  if (!std::isfinite(r.residual_norm) || r.residual_norm > impl_->options.inner_tol) {
    throw NumericalError("singular", "direct_solve: residual " + sci(r.residual_norm) + " above tolerance " +
                                         sci(impl_->options.inner_tol) + " (discrete operator nearly singular)");
  }
  r.solution = DiscreteFunction(problem.space, std::move(u));
  return r;
}

SolveReport direct_solve(const DiscreteProblem& problem, const Vector& psi, const SolverOptions& options) {
  if (psi.norm() == 0.0) {
    SolveReport r;
    r.method = "sparse_lu";
    r.solution = DiscreteFunction(problem.space, Vector::Zero(psi.size()));
    return r;
  }
  return DirectSolver(problem, options).solve(psi);
}

SolveReport direct_solve(const DiscreteProblem& problem, const SolverOptions& options) {
  return direct_solve(problem, problem.load, options);
}

double fixed_point_residual(const DiscreteProblem& problem, const Vector& u, const Vector& psi,
                            const SolverOptions& options) {
  ShiftedSolver k(problem, options);
  const Vector kpsi = k.apply(psi);
  Vector t = u - kpsi;
  if (problem.gamma != 0.0) t -= problem.gamma * k.apply(problem.mass.matrix * u);
  return relative(t.norm(), kpsi.norm());
}

// ---------------------------------------------------------------------------

namespace {

double sampled_min(const ScalarField& g, const GridSpec& grid) {
  const CellRule rule = make_cell_rule(grid, grid.quadrature_order);
  std::vector<double> x(grid.dim);
  double m = kInfinity;
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      quadrature_point(grid, rule, c, q, x);
      m = std::min(m, g(x));
    }
  }
  return m;
}

LadderLevel solve_level(const Coefficients& cf, const std::shared_ptr<const FemSpace>& space, double n,
                        const SolverOptions& options) {
  LadderLevel lv;
  lv.level = n;
  Coefficients cn = cf;
  cn.c = truncate(cf.c, n);
  lv.c_min = sampled_min(cn.c, space->grid());
  const DiscreteProblem p = make_problem(space, cn, 0.0);
  lv.report = direct_solve(p, options);
  const Vector& u = lv.report.solution.values();
  lv.grad_l2 = norm(*space, u, NormKind::h1_semi);
  lv.linf = norm(*space, u, NormKind::linf);
  lv.energy = p.load.dot(u);
  return lv;
}

}  // namespace

LadderResult rough_c_solve(const Coefficients& cf, const GridSpec& grid, std::vector<double> ladder, int parallel,
                           const SolverOptions& options) {
  if (ladder.empty()) throw std::invalid_argument("rough_c_solve: empty ladder");
  std::sort(ladder.begin(), ladder.end());
  const auto space = build_space(grid);
  LadderResult out;
  out.levels.resize(ladder.size());
  const std::size_t width = static_cast<std::size_t>(std::max(1, parallel));
  for (std::size_t start = 0; start < ladder.size(); start += width) {
    const std::size_t stop = std::min(ladder.size(), start + width);
    if (width == 1) {
      out.levels[start] = solve_level(cf, space, ladder[start], options);
      continue;
    }
    std::vector<std::future<LadderLevel>> jobs;
    for (std::size_t i = start; i < stop; ++i) {
      jobs.push_back(std::async(std::launch::async, solve_level, std::cref(cf), std::cref(space), ladder[i],
                                std::cref(options)));
    }
    for (std::size_t i = start; i < stop; ++i) out.levels[i] = jobs[i - start].get();
  }

  out.symmetric = cf.h.zero() || lp_norm(cf.h, kInfinity, grid).value == 0.0;
  for (std::size_t i = 0; i < out.levels.size(); ++i) {
    auto& lv = out.levels[i];
    std::ostringstream where;
    where << "truncation sequence unstable at n=" << lv.level << ": ";
    if (lv.c_min < 0.0) {
      throw NumericalError("truncation_unstable", where.str() + "negative zero-order coefficient " + sci(lv.c_min));
    }
    if (!std::isfinite(lv.grad_l2) || !std::isfinite(lv.energy)) {
      throw NumericalError("truncation_unstable", where.str() + "non-finite solution");
    }
    if (i == 0) continue;
    const auto& prev = out.levels[i - 1];
    lv.h1_difference = norm(*space, lv.report.solution.values() - prev.report.solution.values(), NormKind::h1);
    if (out.symmetric && lv.energy > prev.energy + 1e-8 * std::abs(prev.energy)) {
      throw NumericalError("truncation_unstable",
                           where.str() + "energy increased from " + sci(prev.energy) + " to " + sci(lv.energy));
    }
  }
  out.limit = out.levels.back().report.solution;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Probe> default_probes(const GridSpec& grid) {
  const int d = grid.dim;
  std::vector<std::vector<int>> all;
  std::vector<int> k(d, 1);
  while (true) {
    all.push_back(k);
    int a = 0;
    while (a < d && k[a] == 3) k[a++] = 1;
    if (a == d) break;
    ++k[a];
  }
  auto sq = [](const std::vector<int>& v) {
    int s = 0;
    for (int x : v) s += x * x;
    return s;
  };
  std::stable_sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
    if (sq(a) != sq(b)) return sq(a) < sq(b);
    return a < b;
  });
  all.resize(std::min<std::size_t>(8, all.size()));

  std::vector<Probe> probes;
  for (const auto& freq : all) {
    std::vector<double> lo(d), len(d);
    for (int a = 0; a < d; ++a) {
      lo[a] = grid.extents[a].lo;
      len[a] = grid.extents[a].length();
    }
    std::ostringstream label;
    label << "probe(";
    for (int a = 0; a < d; ++a) label << (a ? "," : "") << freq[a];
    label << ")";
    ScalarField phi(
        [freq, lo, len](std::span<const double> x) {
          double v = 1.0;
          for (std::size_t a = 0; a < freq.size(); ++a) {
            v *= std::sin(freq[a] * std::numbers::pi * (x[a] - lo[a]) / len[a]);
          }
          return v;
        },
        label.str());
    probes.push_back({freq, std::move(phi)});
  }
  return probes;
}

std::vector<ProbeValue> duality_probe(const DiscreteProblem& problem, const DiscreteFunction& u1,
                                      const DiscreteFunction& u2, const std::vector<Probe>& probes) {
  const auto& space = *problem.space;
  if (static_cast<std::size_t>(u1.values().size()) != space.size() ||
      static_cast<std::size_t>(u2.values().size()) != space.size()) {
    throw std::invalid_argument("duality_probe: functions do not live on the problem's space");
  }
  const Vector v = u1.values() - u2.values();
  const Vector bv = problem.op.matrix * v;
  const ColMatrix bt = problem.op.matrix.transpose();
  LU lu;
  factorize(lu, bt, "duality_probe");
  std::vector<ProbeValue> out;
  for (const auto& p : probes) {
    const Vector rhs = assemble_load(space, p.field);
    const Vector w = lu.solve(rhs);
    ProbeValue pv;
    pv.frequencies = p.frequencies;
    pv.integral = w.dot(bv);
    pv.direct = rhs.dot(v);
    pv.phi_l2 = lp_norm(p.field, 2.0, space.grid()).value;
    out.push_back(pv);
  }
  return out;
}

}  // namespace divfree
