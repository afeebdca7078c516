#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <utility>

#include <Eigen/Core>

#include "elflow/grid.hpp"

namespace elflow {

/// Ghost rule applied in Dirichlet mode: Odd gives ghost = -interior (zero
/// trace on the face), Even gives ghost = +interior (zero normal derivative).
enum class Parity : std::uint8_t { Odd, Even };

class FieldError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Cell-centered field with `dim^Rank` real components per cell, stored
/// component-major over the padded grid: data()(component, flat_index).
/// Rank-2 entries are row-major, component r*dim + s holds M_rs.
template <typename Scalar_, int Rank>
class Field {
 public:
  using Scalar = Scalar_;
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  static constexpr int rank = Rank;
  static constexpr Parity default_parity = Rank == 0 ? Parity::Even : Parity::Odd;

  Field() = default;
  explicit Field(const Grid& g, Parity parity = default_parity)
      : grid_(g), parity_(parity), data_(Storage::Zero(components_for(g.dim), g.padded_cells())) {}

  static int components_for(int dim) { return Rank == 0 ? 1 : Rank == 1 ? dim : dim * dim; }

  const Grid& grid() const { return grid_; }
  Parity parity() const { return parity_; }
  void set_parity(Parity p) { parity_ = p; }
  int components() const { return static_cast<int>(data_.rows()); }

  Storage& data() { return data_; }
  const Storage& data() const { return data_; }

  Scalar& operator()(int c, Index idx) { return data_(c, idx); }
  Scalar operator()(int c, Index idx) const { return data_(c, idx); }

  Scalar& entry(int r, int s, Index idx) { return data_(r * grid_.dim + s, idx); }
  Scalar entry(int r, int s, Index idx) const { return data_(r * grid_.dim + s, idx); }

  void set_zero() { data_.setZero(); }

  Field& operator+=(const Field& o) {
    check_compatible(o);
    data_ += o.data_;
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_compatible(o);
    data_ -= o.data_;
    return *this;
  }
  Field& operator*=(Scalar a) {
    data_ *= a;
    return *this;
  }
  /// this += a * x
  Field& axpy(Scalar a, const Field& x) {
    check_compatible(x);
    data_ += a * x.data_;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Scalar s, Field a) { return a *= s; }
  friend Field operator-(Field a) {
    a.data_ = -a.data_;
    return a;
  }

  bool bitwise_equal(const Field& o) const {
    return grid_ == o.grid_ && parity_ == o.parity_ && data_.rows() == o.data_.rows() &&
           data_.cols() == o.data_.cols() &&
           std::equal(data_.data(), data_.data() + data_.size(), o.data_.data(),
                      [](Scalar x, Scalar y) { return std::memcmp(&x, &y, sizeof(Scalar)) == 0; });
  }

  void check_compatible(const Field& o) const {
    if (grid_ != o.grid_ || data_.rows() != o.data_.rows())
      throw FieldError("field grid mismatch");
  }

 private:
  Grid grid_;
  Parity parity_ = default_parity;
  Storage data_;
};

template <typename S> using ScalarFieldT = Field<S, 0>;
template <typename S> using VectorFieldT = Field<S, 1>;
template <typename S> using MatrixFieldT = Field<S, 2>;

using ScalarField = ScalarFieldT<double>;
using VectorField = VectorFieldT<double>;
using MatrixField = MatrixFieldT<double>;

/// Fills ghost layers: wrap-around in periodic mode, parity reflection about
/// the cell face in Dirichlet mode. Axes are processed in order so corner
/// ghosts are consistent; applying it twice is a bitwise no-op.
template <typename S, int R>
void enforce_boundary(Field<S, R>& f) {
  const Grid& g = f.grid();
  auto& d = f.data();
  const bool odd = f.parity() == Parity::Odd;
  const bool periodic = g.boundary == Boundary::Periodic;
  for (int a = 0; a < g.dim; ++a) {
    const Index sa = g.stride(a);
    const int na = g.n[a];
    // Loop over the two ghost planes along axis a, all padded positions on the others.
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (int pc = 0; pc < g.padded(c); ++pc)
      for (int pb = 0; pb < g.padded(b); ++pb) {
        const Index base = pb * g.stride(b) + pc * g.stride(c);
        const Index lo_ghost = base;                        // padded position 0
        const Index hi_ghost = base + (na + 1) * sa;        // padded position n+1
        const Index first = base + 1 * sa;                  // interior 0
        const Index last = base + na * sa;                  // interior n-1
        if (periodic) {
          d.col(lo_ghost) = d.col(last);
          d.col(hi_ghost) = d.col(first);
        } else if (odd) {
          // 0 - x rather than -x: a zero interior keeps +0 ghosts.
          d.col(lo_ghost) = S(0) - d.col(first);
          d.col(hi_ghost) = S(0) - d.col(last);
        } else {
          d.col(lo_ghost) = d.col(first);
          d.col(hi_ghost) = d.col(last);
        }
      }
  }
}

/// Sets interior values from f(x, y, z, out) and fills ghosts.
template <typename FieldT, typename Fn>
FieldT field_from_function(const Grid& g, Fn&& fn, Parity parity = FieldT::default_parity) {
  FieldT out(g, parity);
  Eigen::Matrix<typename FieldT::Scalar, Eigen::Dynamic, 1> v(out.components());
  for_each_interior(g, [&](Index idx, int i, int j, int k) {
    v.setZero();
    fn(g.center(0, i), g.center(1, j), g.dim > 2 ? g.center(2, k) : 0.0, v);
    out.data().col(idx) = v.array();
  });
  enforce_boundary(out);
  return out;
}

/// Discrete L2 inner product over interior cells, weighted by cell volume.
template <typename S, int R>
S dot(const Field<S, R>& a, const Field<S, R>& b) {
  a.check_compatible(b);
  S sum = 0;
  for_each_interior(a.grid(), [&](Index idx, int, int, int) {
    sum += (a.data().col(idx) * b.data().col(idx)).sum();
  });
  return sum * static_cast<S>(a.grid().cell_volume());
}

template <typename S, int R>
S l2_norm(const Field<S, R>& a) {
  return std::sqrt(dot(a, a));
}

/// Largest absolute component value over interior cells.
template <typename S, int R>
S max_abs(const Field<S, R>& a) {
  S m = 0;
  for_each_interior(a.grid(), [&](Index idx, int, int, int) {
    m = std::max(m, a.data().col(idx).abs().maxCoeff());
  });
  return m;
}

/// Interior mean of one component.
template <typename S, int R>
S interior_mean(const Field<S, R>& a, int component = 0) {
  S sum = 0;
  for_each_interior(a.grid(), [&](Index idx, int, int, int) { sum += a(component, idx); });
  return sum / static_cast<S>(a.grid().cells());
}

/// Interior values of one component, x fastest.
template <typename S, int R>
Eigen::Matrix<S, Eigen::Dynamic, 1> interior_vector(const Field<S, R>& a, int component) {
  Eigen::Matrix<S, Eigen::Dynamic, 1> v(a.grid().cells());
  Index m = 0;
  for_each_interior(a.grid(), [&](Index idx, int, int, int) { v[m++] = a(component, idx); });
  return v;
}

template <typename S, int R>
void set_interior(Field<S, R>& a, int component, const Eigen::Matrix<S, Eigen::Dynamic, 1>& v) {
  Index m = 0;
  for_each_interior(a.grid(), [&](Index idx, int, int, int) { a(component, idx) = v[m++]; });
}

/// The triplet advanced by every integrator.
struct State {
  double t = 0.0;
  VectorField u;
  MatrixField F;
  ScalarField P;

  const Grid& grid() const { return u.grid(); }
};

State zero_state(const Grid& g);

}  // namespace elflow
