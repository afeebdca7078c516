#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace elflow {

using Index = Eigen::Index;

enum class Boundary : std::uint8_t { Dirichlet = 0, Periodic = 1 };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Rectangular box discretized by cell-centered cells with one ghost layer
/// per side along each active axis. Axes beyond `dim` have extent 1 and no
/// ghosts, so 2-D and 3-D grids share the same flat indexing.
struct Grid {
  int dim = 2;
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> L{1.0, 1.0, 1.0};
  std::array<double, 3> h{1.0, 1.0, 1.0};
  Boundary boundary = Boundary::Periodic;

  int padded(int axis) const { return axis < dim ? n[axis] + 2 : 1; }
  int ghost(int axis) const { return axis < dim ? 1 : 0; }

  Index stride(int axis) const {
    Index s = 1;
    for (int a = 0; a < axis; ++a) s *= padded(a);
    return s;
  }

  Index padded_cells() const {
    return Index(padded(0)) * padded(1) * padded(2);
  }
  Index cells() const { return Index(n[0]) * n[1] * n[2]; }
  double cell_volume() const { return h[0] * h[1] * h[2]; }
  double volume() const { return cell_volume() * static_cast<double>(cells()); }

  double min_spacing() const {
    double m = h[0];
    for (int a = 1; a < dim; ++a) m = std::min(m, h[a]);
    return m;
  }

  /// Flat index of logical cell (i, j, k); interior cells are 0..n-1, ghosts -1 and n.
  Index index(int i, int j, int k = 0) const {
    return (i + ghost(0)) + stride(1) * (j + ghost(1)) + stride(2) * (k + ghost(2));
  }

  /// Cell-center coordinate along `axis`.
  double center(int axis, int i) const { return (i + 0.5) * h[axis]; }

  bool operator==(const Grid& o) const {
    return dim == o.dim && n == o.n && L == o.L && boundary == o.boundary;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Validates and builds a grid. `n` and `L` must carry at least `dim` entries.
Grid make_grid(int dim, const std::array<int, 3>& n, const std::array<double, 3>& L,
               Boundary boundary);

inline Grid make_grid(int dim, int cells_per_axis, double length, Boundary boundary) {
  return make_grid(dim, {cells_per_axis, cells_per_axis, cells_per_axis},
                   {length, length, length}, boundary);
}

/// Calls f(flat_index, i, j, k) for every interior cell, x fastest.
template <typename Fn>
void for_each_interior(const Grid& g, Fn&& f) {
  const int nk = g.dim > 2 ? g.n[2] : 1;
  for (int k = 0; k < nk; ++k)
    for (int j = 0; j < g.n[1]; ++j) {
      Index idx = g.index(0, j, k);
      for (int i = 0; i < g.n[0]; ++i, ++idx) f(idx, i, j, k);
    }
}

}  // namespace elflow
