#include "divfree/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace divfree {

GridSpec GridSpec::unit_cube(int dim, int cells_per_axis, int quadrature_order) {
  GridSpec g;
  g.dim = dim;
  g.extents.assign(static_cast<std::size_t>(std::max(dim, 0)), Interval{0.0, 1.0});
  g.cells.assign(static_cast<std::size_t>(std::max(dim, 0)), cells_per_axis);
  g.quadrature_order = quadrature_order;
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (dim < 3) {
    throw std::invalid_argument("grid.dim: must be >= 3 (got " + std::to_string(dim) + ")");
  }
  if (extents.size() != static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("grid.extents: expected " + std::to_string(dim) + " intervals");
  }
  if (cells.size() != static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("grid.cells: expected " + std::to_string(dim) + " entries");
  }
  for (int a = 0; a < dim; ++a) {
    const auto& e = extents[a];
    if (!(std::isfinite(e.lo) && std::isfinite(e.hi) && e.lo < e.hi)) {
      throw std::invalid_argument("grid.extents[" + std::to_string(a) + "]: degenerate interval");
    }
    if (cells[a] < 2) {
      throw std::invalid_argument("grid.cells[" + std::to_string(a) + "]: must be >= 2");
    }
  }
  if (quadrature_order < 2) {
    throw std::invalid_argument("grid.quadrature_order: must be >= 2");
  }
}

std::size_t GridSpec::num_nodes() const {
  std::size_t n = 1;
  for (int c : cells) n *= static_cast<std::size_t>(c + 1);
  return n;
}

std::size_t GridSpec::num_interior_nodes() const {
  std::size_t n = 1;
  for (int c : cells) n *= static_cast<std::size_t>(c - 1);
  return n;
}

std::size_t GridSpec::num_cells() const {
  std::size_t n = 1;
  for (int c : cells) n *= static_cast<std::size_t>(c);
  return n;
}

double GridSpec::measure() const {
  double m = 1.0;
  for (const auto& e : extents) m *= e.length();
  return m;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= spacing(a);
  return v;
}

void GridSpec::node_index(std::size_t node, std::span<int> idx) const {
  for (int a = 0; a < dim; ++a) {
    const auto n = static_cast<std::size_t>(cells[a] + 1);
    idx[a] = static_cast<int>(node % n);
    node /= n;
  }
}

std::size_t GridSpec::node_id(std::span<const int> idx) const {
  std::size_t id = 0;
  for (int a = dim - 1; a >= 0; --a) {
    id = id * static_cast<std::size_t>(cells[a] + 1) + static_cast<std::size_t>(idx[a]);
  }
  return id;
}

void GridSpec::node_point(std::size_t node, std::span<double> x) const {
  for (int a = 0; a < dim; ++a) {
    const auto n = static_cast<std::size_t>(cells[a] + 1);
    const auto i = static_cast<int>(node % n);
    node /= n;
    x[a] = i == cells[a] ? extents[a].hi : extents[a].lo + i * spacing(a);
  }
}

bool GridSpec::on_boundary(std::size_t node) const {
  for (int a = 0; a < dim; ++a) {
    const auto n = static_cast<std::size_t>(cells[a] + 1);
    const auto i = static_cast<int>(node % n);
    node /= n;
    if (i == 0 || i == cells[a]) return true;
  }
  return false;
}

void GridSpec::cell_index(std::size_t cell, std::span<int> idx) const {
  for (int a = 0; a < dim; ++a) {
    const auto n = static_cast<std::size_t>(cells[a]);
    idx[a] = static_cast<int>(cell % n);
    cell /= n;
  }
}

void GridSpec::cell_nodes(std::size_t cell, std::span<std::size_t> nodes) const {
  std::vector<int> idx(dim);
  cell_index(cell, idx);
  std::size_t base = node_id(idx);
  std::vector<std::size_t> stride(dim);
  std::size_t s = 1;
  for (int a = 0; a < dim; ++a) {
    stride[a] = s;
    s *= static_cast<std::size_t>(cells[a] + 1);
  }
  const int corners = 1 << dim;
  for (int k = 0; k < corners; ++k) {
    std::size_t id = base;
    for (int a = 0; a < dim; ++a) {
      if (k & (1 << a)) id += stride[a];
    }
    nodes[k] = id;
  }
}

void GridSpec::cell_lower_corner(std::size_t cell, std::span<double> x) const {
  for (int a = 0; a < dim; ++a) {
    const auto n = static_cast<std::size_t>(cells[a]);
    const auto i = static_cast<int>(cell % n);
    cell /= n;
    x[a] = extents[a].lo + i * spacing(a);
  }
}

std::size_t GridSpec::locate(std::span<const double> x, std::span<double> ref) const {
  std::size_t id = 0;
  for (int a = dim - 1; a >= 0; --a) {
    const double h = spacing(a);
    const double t = (x[a] - extents[a].lo) / h;
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, cells[a] - 1);
    ref[a] = t - i;
    id = id * static_cast<std::size_t>(cells[a]) + static_cast<std::size_t>(i);
  }
  return id;
}

std::size_t GridSpec::nearest_node(std::span<const double> x) const {
  std::vector<int> idx(dim);
  for (int a = 0; a < dim; ++a) {
    const double t = (x[a] - extents[a].lo) / spacing(a);
    idx[a] = std::clamp(static_cast<int>(std::floor(t + 0.5)), 0, cells[a]);
  }
  return node_id(idx);
}

std::vector<double> GridSpec::center() const {
  std::vector<double> c(dim);
  for (int a = 0; a < dim; ++a) c[a] = 0.5 * (extents[a].lo + extents[a].hi);
  return c;
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  os << "d=" << dim << " cells=";
  for (int a = 0; a < dim; ++a) os << (a ? "x" : "") << cells[a];
  os << " q=" << quadrature_order;
  return os.str();
}

namespace {

// Shared walk over the 2^d corners of the cell containing x.
template <typename Visit>
void visit_corners(const GridSpec& grid, std::span<const double> x, Visit&& visit) {
  const int d = grid.dim;
  std::vector<double> ref(d);
  const std::size_t cell = grid.locate(x, ref);
  std::vector<std::size_t> nodes(std::size_t{1} << d);
  grid.cell_nodes(cell, nodes);
  for (int k = 0; k < (1 << d); ++k) visit(k, nodes[k], ref);
}

}  // namespace

double interpolate_q1(const GridSpec& grid, std::span<const double> nodal, std::span<const double> x) {
  double value = 0.0;
  visit_corners(grid, x, [&](int k, std::size_t node, const std::vector<double>& ref) {
    double w = 1.0;
    for (int a = 0; a < grid.dim; ++a) w *= (k & (1 << a)) ? ref[a] : 1.0 - ref[a];
    value += w * nodal[node];
  });
  return value;
}

void gradient_q1(const GridSpec& grid, std::span<const double> nodal, std::span<const double> x,
                 std::span<double> grad) {
  const int d = grid.dim;
  std::vector<double> ref(d);
  const std::size_t cell = grid.locate(x, ref);
  std::vector<std::size_t> nodes(std::size_t{1} << d);
  grid.cell_nodes(cell, nodes);
  // weighted differences along the edges of each axis
  for (int a = 0; a < d; ++a) {
    double g = 0.0;
    for (int k = 0; k < (1 << d); ++k) {
      if (k & (1 << a)) continue;
      double w = 1.0;
      for (int b = 0; b < d; ++b) {
        if (b != a) w *= (k & (1 << b)) ? ref[b] : 1.0 - ref[b];
      }
      g += w * (nodal[nodes[k | (1 << a)]] - nodal[nodes[k]]);
    }
    grad[a] = g / grid.spacing(a);
  }
}

}  // namespace divfree
