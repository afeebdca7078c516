#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "elflow/field.hpp"

// Discrete differential operators on the collocated grid. All operators read
// ghost layers as stored (inputs must have been passed through
// enforce_boundary, which every producer here does) and return outputs with
// ghosts filled. Gradient convention: (grad u)_{jk} = d u_j / d x_k.

namespace elflow {

namespace testing {
/// Test-only fault injection: when set, laplacian() perturbs its center
/// coefficient so oracle comparisons must fail.
void set_stencil_fault(bool on);
bool stencil_fault();
}  // namespace testing

namespace detail {

template <typename S>
struct AxisStencil {
  std::array<Index, 3> stride{};
  std::array<S, 3> inv_2h{};
  std::array<S, 3> inv_h2{};
};

template <typename S>
AxisStencil<S> axis_stencil(const Grid& g) {
  AxisStencil<S> st;
  for (int a = 0; a < 3; ++a) {
    st.stride[a] = g.stride(a);
    st.inv_2h[a] = S(0.5) / static_cast<S>(g.h[a]);
    st.inv_h2[a] = S(1) / static_cast<S>(g.h[a] * g.h[a]);
  }
  return st;
}

template <typename Storage>
auto centered(const Storage& d, int c, Index idx, Index s) {
  return d(c, idx + s) - d(c, idx - s);
}

}  // namespace detail

/// Centered gradient of a scalar field; component a is d s / d x_a.
template <typename S>
VectorFieldT<S> grad_scalar(const ScalarFieldT<S>& s) {
  const Grid& g = s.grid();
  const auto st = detail::axis_stencil<S>(g);
  VectorFieldT<S> out(g);
  const auto& d = s.data();
  for_each_interior(g, [&](Index idx, int, int, int) {
    for (int a = 0; a < g.dim; ++a)
      out(a, idx) = detail::centered(d, 0, idx, st.stride[a]) * st.inv_2h[a];
  });
  enforce_boundary(out);
  return out;
}

/// Centered gradient of a vector field, (grad u)_{jk} = d u_j / d x_k.
template <typename S>
MatrixFieldT<S> grad_vector(const VectorFieldT<S>& u) {
  const Grid& g = u.grid();
  const auto st = detail::axis_stencil<S>(g);
  MatrixFieldT<S> out(g);
  const auto& d = u.data();
  for_each_interior(g, [&](Index idx, int, int, int) {
    for (int j = 0; j < g.dim; ++j)
      for (int k = 0; k < g.dim; ++k)
        out.entry(j, k, idx) = detail::centered(d, j, idx, st.stride[k]) * st.inv_2h[k];
  });
  enforce_boundary(out);
  return out;
}

template <typename S>
ScalarFieldT<S> div_vector(const VectorFieldT<S>& u) {
  const Grid& g = u.grid();
  const auto st = detail::axis_stencil<S>(g);
  ScalarFieldT<S> out(g);
  const auto& d = u.data();
  for_each_interior(g, [&](Index idx, int, int, int) {
    S sum = 0;
    for (int a = 0; a < g.dim; ++a) sum += detail::centered(d, a, idx, st.stride[a]) * st.inv_2h[a];
    out(0, idx) = sum;
  });
  enforce_boundary(out);
  return out;
}

/// Row-wise divergence, (div M)_j = sum_k d M_{jk} / d x_k.
template <typename S>
VectorFieldT<S> div_matrix(const MatrixFieldT<S>& m) {
  const Grid& g = m.grid();
  const auto st = detail::axis_stencil<S>(g);
  VectorFieldT<S> out(g);
  const auto& d = m.data();
  for_each_interior(g, [&](Index idx, int, int, int) {
    for (int j = 0; j < g.dim; ++j) {
      S sum = 0;
      for (int k = 0; k < g.dim; ++k)
        sum += detail::centered(d, j * g.dim + k, idx, st.stride[k]) * st.inv_2h[k];
      out(j, idx) = sum;
    }
  });
  enforce_boundary(out);
  return out;
}

/// Compact (2*dim+1)-point Laplacian, componentwise; keeps the input parity.
template <typename S, int R>
Field<S, R> laplacian(const Field<S, R>& f) {
  const Grid& g = f.grid();
  const auto st = detail::axis_stencil<S>(g);
  const S center_scale = testing::stencil_fault() ? S(1.001) : S(1);
  Field<S, R> out(g, f.parity());
  const auto& d = f.data();
  const int nc = f.components();
  for_each_interior(g, [&](Index idx, int, int, int) {
    for (int c = 0; c < nc; ++c) {
      S sum = 0;
      for (int a = 0; a < g.dim; ++a) {
        const Index s = st.stride[a];
        sum += (d(c, idx + s) - S(2) * center_scale * d(c, idx) + d(c, idx - s)) * st.inv_h2[a];
      }
      out(c, idx) = sum;
    }
  });
  enforce_boundary(out);
  return out;
}

/// Directional derivative (v . grad) f, componentwise on f; keeps f's parity.
template <typename S, int R>
Field<S, R> advect(const VectorFieldT<S>& v, const Field<S, R>& f) {
  const Grid& g = f.grid();
  if (v.grid() != g) throw FieldError("advect: grid mismatch");
  const auto st = detail::axis_stencil<S>(g);
  Field<S, R> out(g, f.parity());
  const auto& d = f.data();
  const int nc = f.components();
  for_each_interior(g, [&](Index idx, int, int, int) {
    for (int c = 0; c < nc; ++c) {
      S sum = 0;
      for (int a = 0; a < g.dim; ++a)
        sum += v(a, idx) * detail::centered(d, c, idx, st.stride[a]) * st.inv_2h[a];
      out(c, idx) = sum;
    }
  });
  enforce_boundary(out);
  return out;
}

/// Pointwise product F (grad u), (F grad u)_{ik} = sum_j F_{ij} (grad u)_{jk}.
template <typename S>
MatrixFieldT<S> stretch(const MatrixFieldT<S>& F, const VectorFieldT<S>& u) {
  const Grid& g = F.grid();
  if (u.grid() != g) throw FieldError("stretch: grid mismatch");
  const MatrixFieldT<S> gu = grad_vector(u);
  MatrixFieldT<S> out(g);
  const int n = g.dim;
  for_each_interior(g, [&](Index idx, int, int, int) {
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        S sum = 0;
        for (int j = 0; j < n; ++j) sum += F.entry(i, j, idx) * gu.entry(j, k, idx);
        out.entry(i, k, idx) = sum;
      }
  });
  enforce_boundary(out);
  return out;
}

/// Pointwise F^T F. The product of two odd extensions is even, so the result
/// carries Even parity; its ghosts equal the pointwise product of F's ghosts.
template <typename S>
MatrixFieldT<S> gram(const MatrixFieldT<S>& F) {
  const Grid& g = F.grid();
  MatrixFieldT<S> out(g, Parity::Even);
  const int n = g.dim;
  for_each_interior(g, [&](Index idx, int, int, int) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        S sum = 0;
        for (int r = 0; r < n; ++r) sum += F.entry(r, i, idx) * F.entry(r, j, idx);
        out.entry(i, j, idx) = sum;
      }
  });
  enforce_boundary(out);
  return out;
}

/// +div(F^T F); the momentum equation applies the minus sign.
template <typename S>
VectorFieldT<S> elastic_stress(const MatrixFieldT<S>& F) {
  return div_matrix(gram(F));
}

/// F_{ik} = d d_i / d x_k.
template <typename S>
MatrixFieldT<S> d_to_F(const VectorFieldT<S>& d) {
  MatrixFieldT<S> F = grad_vector(d);
  F.set_parity(Parity::Odd);
  enforce_boundary(F);
  return F;
}

/// Pointwise max over rows i and axis pairs (k, l) of
/// |d F_{ik}/d x_l - d F_{il}/d x_k|.
template <typename S>
ScalarFieldT<S> curl_residual_map(const MatrixFieldT<S>& F) {
  const Grid& g = F.grid();
  const auto st = detail::axis_stencil<S>(g);
  const auto& d = F.data();
  const int n = g.dim;
  ScalarFieldT<S> out(g);
  for_each_interior(g, [&](Index idx, int, int, int) {
    S worst = 0;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          const S dl = detail::centered(d, i * n + k, idx, st.stride[l]) * st.inv_2h[l];
          const S dk = detail::centered(d, i * n + l, idx, st.stride[k]) * st.inv_2h[k];
          worst = std::max(worst, std::abs(dl - dk));
        }
    out(0, idx) = worst;
  });
  enforce_boundary(out);
  return out;
}

/// Consistency monitor for F = grad d: zero when every row of F is a discrete gradient.
template <typename S>
S curl_residual(const MatrixFieldT<S>& F) {
  return max_abs(curl_residual_map(F));
}

/// Maps an affine director d = A x + w (w on the grid) to F = A + grad w.
template <typename S>
MatrixFieldT<S> director_to_F(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& A,
                              const VectorFieldT<S>& w) {
  if (w.grid().boundary == Boundary::Dirichlet && A.cwiseAbs().maxCoeff() != S(0))
    throw FieldError("director_to_F: an affine background needs a periodic grid");
  MatrixFieldT<S> F = d_to_F(w);
  const int n = F.grid().dim;
  for_each_interior(F.grid(), [&](Index idx, int, int, int) {
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) F.entry(i, k, idx) += A(i, k);
  });
  enforce_boundary(F);
  return F;
}

}  // namespace elflow
