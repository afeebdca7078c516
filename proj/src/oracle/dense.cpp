#include "elflow/oracle/dense.hpp"

#include <algorithm>
#include <cmath>

namespace elflow::oracle {

namespace {

struct Neighbor {
  Index cell;
  double sign;
};

// Neighbor of (i, j, k) shifted by `offset` along `axis`, resolved without ghosts.
Neighbor neighbor(const Grid& g, int i, int j, int k, int axis, int offset, Parity p) {
  int idx[3] = {i, j, k};
  int& m = idx[axis];
  m += offset;
  double sign = 1.0;
  const int n = g.n[axis];
  if (m < 0 || m >= n) {
    if (g.boundary == Boundary::Periodic) {
      m = (m + n) % n;
    } else {
      m = m < 0 ? 0 : n - 1;
      sign = p == Parity::Odd ? -1.0 : 1.0;
    }
  }
  return {cell_number(g, idx[0], idx[1], idx[2]), sign};
}

template <typename Fn>
void for_cells(const Grid& g, Fn&& fn) {
  const int nk = g.dim > 2 ? g.n[2] : 1;
  for (int k = 0; k < nk; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) fn(i, j, k);
}

}  // namespace

Index cell_number(const Grid& g, int i, int j, int k) {
  return i + Index(g.n[0]) * (j + Index(g.n[1]) * k);
}

MatrixXd derivative_matrix(const Grid& g, int axis, Parity parity) {
  const Index N = g.cells();
  MatrixXd D = MatrixXd::Zero(N, N);
  const double w = 1.0 / (2.0 * g.h[axis]);
  for_cells(g, [&](int i, int j, int k) {
    const Index row = cell_number(g, i, j, k);
    const Neighbor up = neighbor(g, i, j, k, axis, +1, parity);
    const Neighbor dn = neighbor(g, i, j, k, axis, -1, parity);
    D(row, up.cell) += w * up.sign;
    D(row, dn.cell) -= w * dn.sign;
  });
  return D;
}

MatrixXd laplacian_matrix(const Grid& g, Parity parity) {
  const Index N = g.cells();
  MatrixXd A = MatrixXd::Zero(N, N);
  for_cells(g, [&](int i, int j, int k) {
    const Index row = cell_number(g, i, j, k);
    for (int a = 0; a < g.dim; ++a) {
      const double w = 1.0 / (g.h[a] * g.h[a]);
      const Neighbor up = neighbor(g, i, j, k, a, +1, parity);
      const Neighbor dn = neighbor(g, i, j, k, a, -1, parity);
      A(row, up.cell) += w * up.sign;
      A(row, dn.cell) += w * dn.sign;
      A(row, row) -= 2.0 * w;
    }
  });
  return A;
}

DenseOperators::DenseOperators(const Grid& g) : grid_(g) {
  for (int a = 0; a < g.dim; ++a) {
    d_odd_[a] = derivative_matrix(g, a, Parity::Odd);
    d_even_[a] = derivative_matrix(g, a, Parity::Even);
  }
  lap_odd_ = laplacian_matrix(g, Parity::Odd);
  lap_even_ = laplacian_matrix(g, Parity::Even);
}

MatrixXd DenseOperators::grad_scalar(const MatrixXd& s) const {
  MatrixXd out(grid_.dim, grid_.cells());
  for (int a = 0; a < grid_.dim; ++a) out.row(a) = (D(a, Parity::Even) * s.row(0).transpose()).transpose();
  return out;
}

MatrixXd DenseOperators::grad_vector(const MatrixXd& u, Parity p) const {
  const int n = grid_.dim;
  MatrixXd out(n * n, grid_.cells());
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) out.row(j * n + k) = (D(k, p) * u.row(j).transpose()).transpose();
  return out;
}

MatrixXd DenseOperators::div_vector(const MatrixXd& u, Parity p) const {
  VectorXd s = VectorXd::Zero(grid_.cells());
  for (int a = 0; a < grid_.dim; ++a) s += D(a, p) * u.row(a).transpose();
  return s.transpose();
}

MatrixXd DenseOperators::div_matrix(const MatrixXd& m, Parity p) const {
  const int n = grid_.dim;
  MatrixXd out(n, grid_.cells());
  for (int j = 0; j < n; ++j) {
    VectorXd s = VectorXd::Zero(grid_.cells());
    for (int k = 0; k < n; ++k) s += D(k, p) * m.row(j * n + k).transpose();
    out.row(j) = s.transpose();
  }
  return out;
}

MatrixXd DenseOperators::laplacian(const MatrixXd& f, Parity p) const {
  return (lap(p) * f.transpose()).transpose();
}

MatrixXd DenseOperators::advect(const MatrixXd& v, const MatrixXd& f, Parity p) const {
  MatrixXd out = MatrixXd::Zero(f.rows(), f.cols());
  for (Index c = 0; c < f.rows(); ++c)
    for (int a = 0; a < grid_.dim; ++a) {
      VectorXd dfa = D(a, p) * f.row(c).transpose();
      for (Index m = 0; m < f.cols(); ++m) out(c, m) += v(a, m) * dfa[m];
    }
  return out;
}

MatrixXd DenseOperators::stretch(const MatrixXd& F, const MatrixXd& u) const {
  const int n = grid_.dim;
  const MatrixXd gu = grad_vector(u, Parity::Odd);
  MatrixXd out = MatrixXd::Zero(n * n, grid_.cells());
  for (Index m = 0; m < F.cols(); ++m)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) out(i * n + k, m) += F(i * n + j, m) * gu(j * n + k, m);
  return out;
}

MatrixXd DenseOperators::gram(const MatrixXd& F) const {
  const int n = grid_.dim;
  MatrixXd out = MatrixXd::Zero(n * n, grid_.cells());
  for (Index m = 0; m < F.cols(); ++m)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int r = 0; r < n; ++r) out(i * n + j, m) += F(r * n + i, m) * F(r * n + j, m);
  return out;
}

MatrixXd DenseOperators::elastic_stress(const MatrixXd& F) const {
  return div_matrix(gram(F), Parity::Even);
}

double DenseOperators::curl_residual(const MatrixXd& F) const {
  const int n = grid_.dim;
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = k + 1; l < n; ++l) {
        VectorXd r = D(l, Parity::Odd) * F.row(i * n + k).transpose() -
                     D(k, Parity::Odd) * F.row(i * n + l).transpose();
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
  return worst;
}

}  // namespace elflow::oracle
