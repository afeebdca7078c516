#include "elflow/grid.hpp"

namespace elflow {

std::string to_string(Boundary b) {
  return b == Boundary::Dirichlet ? "dirichlet" : "periodic";
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "dirichlet" || s == "Dirichlet") return Boundary::Dirichlet;
  if (s == "periodic" || s == "Periodic") return Boundary::Periodic;
  throw GridError("unknown boundary mode '" + s + "'");
}

Grid make_grid(int dim, const std::array<int, 3>& n, const std::array<double, 3>& L,
               Boundary boundary) {
  if (dim != 2 && dim != 3) throw GridError("grid dimension must be 2 or 3");
  Grid g;
  g.dim = dim;
  g.boundary = boundary;
  for (int a = 0; a < 3; ++a) {
    if (a < dim) {
      if (n[a] < 4) throw GridError("each axis needs at least 4 cells");
      if (!(L[a] > 0.0)) throw GridError("box lengths must be positive");
      g.n[a] = n[a];
      g.L[a] = L[a];
      g.h[a] = L[a] / n[a];
    } else {
      g.n[a] = 1;
      g.L[a] = 1.0;
      g.h[a] = 1.0;
    }
  }
  return g;
}

}  // namespace elflow
