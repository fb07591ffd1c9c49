#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace divfree {

/// Thrown when a numerical procedure cannot produce a trustworthy result
/// (non-convergence, non-finite data, breakdown). Carries a short kind tag.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double length() const noexcept { return hi - lo; }
};

/// Structured tensor-product grid on the box prod_i (lo_i, hi_i).
///
/// Nodes are numbered lexicographically with axis 0 varying fastest, so a
/// node with multi-index (i_0, ..., i_{d-1}) has id
/// i_0 + n_0 * (i_1 + n_1 * (i_2 + ...)), n_a = cells_a + 1.
/// Cells use the same ordering over cell multi-indices.
struct GridSpec {
  int dim = 3;
  std::vector<Interval> extents;
  std::vector<int> cells;
  int quadrature_order = 2;

  static GridSpec unit_cube(int dim, int cells_per_axis, int quadrature_order = 2);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  double spacing(int axis) const { return extents[axis].length() / cells[axis]; }
  int nodes_along(int axis) const { return cells[axis] + 1; }
  std::size_t num_nodes() const;
  std::size_t num_interior_nodes() const;
  std::size_t num_cells() const;
  double measure() const;
  double cell_volume() const;

  void node_index(std::size_t node, std::span<int> idx) const;
  std::size_t node_id(std::span<const int> idx) const;
  void node_point(std::size_t node, std::span<double> x) const;
  bool on_boundary(std::size_t node) const;

  void cell_index(std::size_t cell, std::span<int> idx) const;
  /// Corner node ids of a cell; local corner k has bit a set iff it sits at
  /// the upper end of axis a.
  void cell_nodes(std::size_t cell, std::span<std::size_t> nodes) const;
  void cell_lower_corner(std::size_t cell, std::span<double> x) const;
  /// Cell containing x (points on shared faces go to the upper cell, clamped
  /// at the domain boundary). Reference coordinates in [0,1]^d go to `ref`.
  std::size_t locate(std::span<const double> x, std::span<double> ref) const;

  /// Node nearest to x (ties broken towards lower index).
  std::size_t nearest_node(std::span<const double> x) const;
  std::vector<double> center() const;

  std::string describe() const;
};

/// Multilinear interpolation of nodal values (one per grid node) at x.
double interpolate_q1(const GridSpec& grid, std::span<const double> nodal, std::span<const double> x);

/// Gradient of the multilinear interpolant inside the cell containing x.
void gradient_q1(const GridSpec& grid, std::span<const double> nodal, std::span<const double> x,
                 std::span<double> grad);

}  // namespace divfree
