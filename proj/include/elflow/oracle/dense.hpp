#pragma once

#include <Eigen/Dense>

#include "elflow/field.hpp"

// Brute-force dense counterparts of the stencil operators. Every matrix is
// assembled by explicit loops over interior cells with neighbor lookup by
// index arithmetic (wrap-around or parity reflection); nothing here touches
// ghost layers, so it shares no code path with the production operators.

namespace elflow::oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Interior cell number of logical (i, j, k), x fastest.
Index cell_number(const Grid& g, int i, int j, int k);

/// Centered first-derivative matrix along `axis` for a field of the given parity.
MatrixXd derivative_matrix(const Grid& g, int axis, Parity parity);

/// Compact Laplacian matrix for the given parity.
MatrixXd laplacian_matrix(const Grid& g, Parity parity);

/// Dense operator set for one grid; fields are handled as (components x cells)
/// matrices of interior values.
class DenseOperators {
 public:
  explicit DenseOperators(const Grid& g);

  const Grid& grid() const { return grid_; }
  const MatrixXd& D(int axis, Parity p) const { return p == Parity::Odd ? d_odd_[axis] : d_even_[axis]; }
  const MatrixXd& lap(Parity p) const { return p == Parity::Odd ? lap_odd_ : lap_even_; }

  MatrixXd grad_scalar(const MatrixXd& s) const;
  MatrixXd grad_vector(const MatrixXd& u, Parity p = Parity::Odd) const;
  MatrixXd div_vector(const MatrixXd& u, Parity p = Parity::Odd) const;
  MatrixXd div_matrix(const MatrixXd& m, Parity p) const;
  MatrixXd laplacian(const MatrixXd& f, Parity p) const;
  MatrixXd advect(const MatrixXd& v, const MatrixXd& f, Parity p) const;
  MatrixXd stretch(const MatrixXd& F, const MatrixXd& u) const;
  MatrixXd gram(const MatrixXd& F) const;
  MatrixXd elastic_stress(const MatrixXd& F) const;
  double curl_residual(const MatrixXd& F) const;

 private:
  Grid grid_;
  MatrixXd d_odd_[3], d_even_[3];
  MatrixXd lap_odd_, lap_even_;
};

template <typename S, int R>
MatrixXd to_dense(const Field<S, R>& f) {
  MatrixXd m(f.components(), f.grid().cells());
  for (int c = 0; c < f.components(); ++c) m.row(c) = interior_vector(f, c).transpose();
  return m;
}

template <typename FieldT>
FieldT from_dense(const Grid& g, const MatrixXd& m, Parity parity = FieldT::default_parity) {
  FieldT f(g, parity);
  for (int c = 0; c < f.components(); ++c) set_interior(f, c, VectorXd(m.row(c).transpose()));
  enforce_boundary(f);
  return f;
}

}  // namespace elflow::oracle
