#include "divfree/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace divfree {

GaussRule1D gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  GaussRule1D rule;
  rule.points.resize(order);
  rule.weights.resize(order);
  // Newton iteration on P_n from the Chebyshev initial guess; symmetric pairs.
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= order; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = order * (z * p1 - p2) / (z * z - 1.0);
      const double z_old = z;
      z = z_old - p1 / dp;
      if (std::abs(z - z_old) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.points[i] = 0.5 * (1.0 - z);
    rule.points[order - 1 - i] = 0.5 * (1.0 + z);
    rule.weights[i] = 0.5 * w;
    rule.weights[order - 1 - i] = 0.5 * w;
  }
  return rule;
}

TensorRule tensor_gauss(int dim, int order) {
  const auto g = gauss_legendre(order);
  TensorRule rule;
  rule.dim = dim;
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(order);
  rule.points.resize(n * dim);
  rule.weights.resize(n);
  for (std::size_t q = 0; q < n; ++q) {
    std::size_t rem = q;
    double w = 1.0;
    for (int a = 0; a < dim; ++a) {
      const auto i = rem % static_cast<std::size_t>(order);
      rem /= static_cast<std::size_t>(order);
      rule.points[q * dim + a] = g.points[i];
      w *= g.weights[i];
    }
    rule.weights[q] = w;
  }
  return rule;
}

CellRule make_cell_rule(const GridSpec& grid, int order) {
  CellRule rule;
  rule.dim = grid.dim;
  rule.corners = 1 << grid.dim;
  rule.reference = tensor_gauss(grid.dim, order);
  const std::size_t nq = rule.reference.size();
  const double vol = grid.cell_volume();
  rule.weights.resize(nq);
  rule.values.resize(nq * rule.corners);
  rule.grads.resize(nq * rule.corners * grid.dim);
  for (std::size_t q = 0; q < nq; ++q) {
    rule.weights[q] = rule.reference.weights[q] * vol;
    const auto xi = rule.reference.point(q);
    for (int k = 0; k < rule.corners; ++k) {
      double v = 1.0;
      for (int a = 0; a < grid.dim; ++a) v *= (k & (1 << a)) ? xi[a] : 1.0 - xi[a];
      rule.values[q * rule.corners + k] = v;
      for (int a = 0; a < grid.dim; ++a) {
        double g = ((k & (1 << a)) ? 1.0 : -1.0) / grid.spacing(a);
        for (int b = 0; b < grid.dim; ++b) {
          if (b != a) g *= (k & (1 << b)) ? xi[b] : 1.0 - xi[b];
        }
        rule.grads[(q * rule.corners + k) * grid.dim + a] = g;
      }
    }
  }
  return rule;
}

void quadrature_point(const GridSpec& grid, const CellRule& rule, std::size_t cell, std::size_t q,
                      std::span<double> x) {
  grid.cell_lower_corner(cell, x);
  const auto xi = rule.reference.point(q);
  for (int a = 0; a < grid.dim; ++a) x[a] += xi[a] * grid.spacing(a);
}

namespace {

struct Node {
  int depth = 0;
  double coarse = 0.0;      // Gauss estimate on the node's box
  double fine = 0.0;        // sum of Gauss estimates on its children
  double dominant = 0.0;    // child estimate of largest magnitude
  double err = 0.0;
  bool leaf = true;
};

class AdaptiveIntegrator {
 public:
  AdaptiveIntegrator(const GridSpec& grid, const std::function<double(std::span<const double>)>& f,
                     const AdaptiveOptions& opt)
      : d_(grid.dim), f_(f), opt_(opt), rule_(tensor_gauss(grid.dim, opt.order)), x_(grid.dim) {}

  std::size_t add_node(std::span<const double> lo, std::span<const double> hi, int depth,
                       double coarse) {
    Node n;
    n.depth = depth;
    n.coarse = coarse;
    const std::size_t id = nodes_.size();
    boxes_.insert(boxes_.end(), lo.begin(), lo.end());
    boxes_.insert(boxes_.end(), hi.begin(), hi.end());
    children_.resize(children_.size() + (std::size_t{1} << d_));
    double fine = 0.0;
    double dominant = 0.0;
    std::vector<double> clo(d_), chi(d_);
    for (int k = 0; k < (1 << d_); ++k) {
      child_box(lo, hi, k, clo, chi);
      const double v = gauss(clo, chi);
      children_[id * (std::size_t{1} << d_) + k] = v;
      fine += v;
      if (std::abs(v) > std::abs(dominant)) dominant = v;
    }
    n.fine = fine;
    n.dominant = dominant;
    n.err = std::abs(fine - coarse);
    nodes_.push_back(n);
    return id;
  }

  double gauss(std::span<const double> lo, std::span<const double> hi) {
    double vol = 1.0;
    for (int a = 0; a < d_; ++a) vol *= hi[a] - lo[a];
    double s = 0.0;
    for (std::size_t q = 0; q < rule_.size(); ++q) {
      const auto xi = rule_.point(q);
      for (int a = 0; a < d_; ++a) x_[a] = lo[a] + xi[a] * (hi[a] - lo[a]);
      const double v = f_(x_);
      if (!std::isfinite(v)) non_finite_ = true;
      s += rule_.weights[q] * v;
    }
    return s * vol;
  }

  void child_box(std::span<const double> lo, std::span<const double> hi, int k,
                 std::span<double> clo, std::span<double> chi) const {
    for (int a = 0; a < d_; ++a) {
      const double mid = 0.5 * (lo[a] + hi[a]);
      if (k & (1 << a)) {
        clo[a] = mid;
        chi[a] = hi[a];
      } else {
        clo[a] = lo[a];
        chi[a] = mid;
      }
    }
  }

  AdaptiveResult run(const GridSpec& grid) {
    std::vector<double> lo(d_), hi(d_);
    for (std::size_t c = 0; c < grid.num_cells(); ++c) {
      grid.cell_lower_corner(c, lo);
      for (int a = 0; a < d_; ++a) hi[a] = lo[a] + grid.spacing(a);
      add_node(lo, hi, 0, gauss(lo, hi));
    }

    using Entry = std::pair<double, std::size_t>;
    auto cmp = [](const Entry& a, const Entry& b) {
      if (a.first != b.first) return a.first < b.first;
      return a.second > b.second;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      heap.emplace(nodes_[i].err, i);
      total += nodes_[i].fine;
      total_err += nodes_[i].err;
    }

    std::vector<std::size_t> capped;
    std::size_t splits = 0;
    int depth = 0;
    while (!heap.empty() && splits < opt_.max_splits && !non_finite_) {
      if (total_err <= opt_.rel_tol * std::abs(total)) break;
      const auto [err, id] = heap.top();
      heap.pop();
      if (nodes_[id].depth >= opt_.max_depth) {
        capped.push_back(id);
        total_err -= err;
        continue;
      }
      std::vector<double> plo(boxes_.begin() + static_cast<std::ptrdiff_t>(id * 2 * d_),
                              boxes_.begin() + static_cast<std::ptrdiff_t>(id * 2 * d_ + d_));
      std::vector<double> phi(boxes_.begin() + static_cast<std::ptrdiff_t>(id * 2 * d_ + d_),
                              boxes_.begin() + static_cast<std::ptrdiff_t>((id + 1) * 2 * d_));
      std::vector<double> clo(d_), chi(d_);
      const int child_depth = nodes_[id].depth + 1;
      depth = std::max(depth, child_depth);
      for (int k = 0; k < (1 << d_); ++k) {
        child_box(plo, phi, k, clo, chi);
        const double coarse = children_[id * (std::size_t{1} << d_) + k];
        const std::size_t c = add_node(clo, chi, child_depth, coarse);
        heap.emplace(nodes_[c].err, c);
        total += nodes_[c].fine;
        total_err += nodes_[c].err;
      }
      total -= nodes_[id].fine;
      total_err -= nodes_[id].err;
      nodes_[id].leaf = false;
      ++splits;
    }

    AdaptiveResult result;
    result.depth = depth;
    if (non_finite_) {
      result.divergent = true;
      result.value = std::numeric_limits<double>::infinity();
      return result;
    }

    double value = 0.0;
    for (const auto& n : nodes_) {
      if (n.leaf) value += n.fine;
    }
    std::vector<bool> is_capped(nodes_.size(), false);
    for (auto id : capped) is_capped[id] = true;

    double remaining = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].leaf && !is_capped[i]) remaining += nodes_[i].err;
    }
    double correction = 0.0;
    for (auto id : capped) {
      const Node& n = nodes_[id];
      if (n.coarse == 0.0) continue;
      const double ratio = n.dominant / n.coarse;
      result.decay_ratio = std::max(result.decay_ratio, ratio);
      if (ratio >= 0.9) {
        if (std::abs(n.fine) > opt_.rel_tol * std::abs(value)) result.divergent = true;
        continue;
      }
      if (ratio <= 0.0) {
        remaining += n.err;
        continue;
      }
      // homogeneous tail: true = (1 + kappa) * coarse with kappa fixed by one split
      const double kappa = (n.fine - n.coarse) / (n.coarse - n.dominant);
      correction += (1.0 + kappa) * n.coarse - n.fine;
      result.extrapolated = true;
    }
    result.value = value + correction;
    result.error_estimate = remaining;
    result.converged = !result.divergent && remaining <= opt_.rel_tol * std::abs(result.value);
    if (result.divergent) result.value = std::numeric_limits<double>::infinity();
    return result;
  }

 private:
  int d_;
  const std::function<double(std::span<const double>)>& f_;
  AdaptiveOptions opt_;
  TensorRule rule_;
  std::vector<double> x_;
  std::vector<Node> nodes_;
  std::vector<double> boxes_;
  std::vector<double> children_;
  bool non_finite_ = false;
};

}  // namespace

AdaptiveResult integrate_adaptive(const GridSpec& grid,
                                  const std::function<double(std::span<const double>)>& f,
                                  const AdaptiveOptions& options) {
  AdaptiveIntegrator integrator(grid, f, options);
  return integrator.run(grid);
}

}  // namespace divfree
