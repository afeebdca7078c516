#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "elflow/errors.hpp"
#include "elflow/operators.hpp"

// Implicit linear sub-problems: the backward-Euler Helmholtz operator
// (I - a Lap_h), the pressure Poisson problem -div_h grad_h P = rhs, the
// discrete Leray projection, and the Stokes / heat steps built from them.

namespace elflow {

struct LinearSolveConfig {
  double tol = 1e-10;
  Index max_iter = 0;  ///< 0 selects 10 x (interior cells x components)

  Index iteration_cap(Index unknowns) const { return max_iter > 0 ? max_iter : 10 * unknowns; }
};

struct LinearSolveReport {
  Index iterations = 0;
  double final_residual = 0.0;
  bool converged = true;

  void merge(const LinearSolveReport& o) {
    iterations += o.iterations;
    final_residual = std::max(final_residual, o.final_residual);
    converged = converged && o.converged;
  }
};

namespace detail {

/// Unweighted interior dot product; the cell volume cancels in relative residuals.
template <typename S, int R>
S raw_dot(const Field<S, R>& a, const Field<S, R>& b) {
  S sum = 0;
  const auto& da = a.data();
  const auto& db = b.data();
  for_each_interior(a.grid(), [&](Index idx, int, int, int) {
    sum += (da.col(idx) * db.col(idx)).sum();
  });
  return sum;
}

/// Number of null-space classes of the collocated pressure operator and the
/// class of a cell. Periodic axes with an even cell count split into two
/// decoupled sub-lattices; Dirichlet (Neumann pressure) has only constants.
inline int nullspace_class(const Grid& g, int i, int j, int k) {
  if (g.boundary == Boundary::Dirichlet) return 0;
  const int idx[3] = {i, j, k};
  int cls = 0;
  for (int a = 0; a < g.dim; ++a)
    if (g.n[a] % 2 == 0) cls |= (idx[a] & 1) << a;
  return cls;
}

inline int nullspace_classes(const Grid& g) {
  if (g.boundary == Boundary::Dirichlet) return 1;
  int m = 1;
  for (int a = 0; a < g.dim; ++a)
    if (g.n[a] % 2 == 0) m *= 2;
  return m;
}

template <typename S>
std::vector<S> class_means(const ScalarFieldT<S>& f) {
  const Grid& g = f.grid();
  const int m = nullspace_classes(g);
  std::vector<S> sum(m, S(0));
  std::vector<Index> count(m, 0);
  for_each_interior(g, [&](Index idx, int i, int j, int k) {
    const int c = nullspace_class(g, i, j, k);
    sum[c] += f(0, idx);
    ++count[c];
  });
  for (int c = 0; c < m; ++c) sum[c] /= static_cast<S>(count[c]);
  return sum;
}

template <typename S>
void remove_nullspace(ScalarFieldT<S>& f) {
  const Grid& g = f.grid();
  const auto means = class_means(f);
  for_each_interior(g, [&](Index idx, int i, int j, int k) {
    f(0, idx) -= means[nullspace_class(g, i, j, k)];
  });
  enforce_boundary(f);
}

/// Plain conjugate gradient on an SPD (or SPSD with `project` removing the
/// null space) operator. `x` carries the initial guess and receives the result.
template <typename FieldT, typename Apply, typename Project>
LinearSolveReport conjugate_gradient(Apply&& apply, const FieldT& b, FieldT& x,
                                     const LinearSolveConfig& cfg, Project&& project) {
  using S = typename FieldT::Scalar;
  LinearSolveReport rep;
  const S bnorm = std::sqrt(raw_dot(b, b));
  if (bnorm == S(0)) {
    x.set_zero();
    rep.converged = true;
    return rep;
  }
  FieldT r = b - apply(x);
  project(r);
  FieldT p = r;
  S rr = raw_dot(r, r);
  const Index cap = cfg.iteration_cap(x.grid().cells() * x.components());
  S rel = std::sqrt(rr) / bnorm;
  Index it = 0;
  while (rel > static_cast<S>(cfg.tol) && it < cap) {
    FieldT Ap = apply(p);
    const S pAp = raw_dot(p, Ap);
    if (!(pAp > S(0))) break;
    const S alpha = rr / pAp;
    x.axpy(alpha, p);
    r.axpy(-alpha, Ap);
    project(r);
    const S rr_new = raw_dot(r, r);
    p *= rr_new / rr;
    p += r;
    rr = rr_new;
    rel = std::sqrt(rr) / bnorm;
    ++it;
  }
  project(x);
  rep.iterations = it;
  rep.final_residual = static_cast<double>(rel);
  rep.converged = rel <= static_cast<S>(cfg.tol);
  return rep;
}

[[noreturn]] inline void throw_not_converged(const char* what, const LinearSolveReport& rep) {
  std::ostringstream os;
  os << what << " stopped after " << rep.iterations << " iterations at relative residual "
     << rep.final_residual;
  throw Error(ErrorKind::NotConverged, os.str());
}

}  // namespace detail

/// Negative collocated pressure operator -div_h(grad_h p), p with Even parity.
template <typename S>
ScalarFieldT<S> neg_pressure_operator(const ScalarFieldT<S>& p) {
  ScalarFieldT<S> out = div_vector(grad_scalar(p));
  out *= S(-1);
  return out;
}

template <typename S>
struct PoissonResult {
  ScalarFieldT<S> P;
  LinearSolveReport report;
};

namespace detail {

template <typename S>
PoissonResult<S> poisson_solve_projected(ScalarFieldT<S> b, const LinearSolveConfig& cfg) {
  b.set_parity(Parity::Even);
  remove_nullspace(b);
  PoissonResult<S> res{ScalarFieldT<S>(b.grid(), Parity::Even), {}};
  res.report = conjugate_gradient(
      [](const ScalarFieldT<S>& p) { return neg_pressure_operator(p); }, b, res.P, cfg,
      [](ScalarFieldT<S>& f) { remove_nullspace(f); });
  if (!res.report.converged) throw_not_converged("poisson_solve", res.report);
  return res;
}

}  // namespace detail

/// Solves -div_h grad_h P = rhs for P with zero mean on every null-space class.
/// Throws NotCompatible when rhs has a component in the operator's null space
/// (a nonzero mean, or a sub-lattice mean on periodic axes with even counts).
template <typename S>
PoissonResult<S> poisson_solve(const ScalarFieldT<S>& rhs, const LinearSolveConfig& cfg) {
  const S scale = max_abs(rhs);
  for (S m : detail::class_means(rhs)) {
    if (std::abs(m) > static_cast<S>(cfg.tol) * scale) {
      std::ostringstream os;
      os << "right-hand side has null-space component " << m << " (max |rhs| " << scale << ")";
      throw Error(ErrorKind::NotCompatible, os.str());
    }
  }
  return detail::poisson_solve_projected(rhs, cfg);
}

template <typename FieldT>
struct HelmholtzResult {
  FieldT x;
  LinearSolveReport report;
};

/// Solves (I - a Lap_h) x = rhs with rhs's boundary parity.
template <typename S, int R>
HelmholtzResult<Field<S, R>> helmholtz_solve(const Field<S, R>& rhs, S a,
                                              const LinearSolveConfig& cfg) {
  if (a < S(0)) throw std::invalid_argument("helmholtz_solve: a must be nonnegative");
  if (a == S(0)) return {rhs, {}};
  HelmholtzResult<Field<S, R>> res{Field<S, R>(rhs.grid(), rhs.parity()), {}};
  res.x = rhs;  // initial guess
  res.report = detail::conjugate_gradient(
      [a](const Field<S, R>& x) {
        Field<S, R> y = laplacian(x);
        y *= -a;
        y += x;
        return y;
      },
      rhs, res.x, cfg, [](Field<S, R>& f) { enforce_boundary(f); });
  if (!res.report.converged) detail::throw_not_converged("helmholtz_solve", res.report);
  return res;
}

template <typename S>
struct ProjectionResult {
  VectorFieldT<S> u;
  ScalarFieldT<S> phi;
  LinearSolveReport report;
};

/// Discrete Leray projection u - grad_h phi with div_h grad_h phi = div_h u.
/// The result's divergence satisfies ||div_h||_2 <= tol * ||div_h u||_2.
template <typename S>
ProjectionResult<S> leray_project(const VectorFieldT<S>& u, const LinearSolveConfig& cfg) {
  // div_h u is orthogonal to the null space up to round-off, so the
  // compatibility test is skipped and the residual null-space part dropped.
  ScalarFieldT<S> rhs = div_vector(u);
  rhs *= S(-1);
  auto ps = detail::poisson_solve_projected(std::move(rhs), cfg);
  ProjectionResult<S> res{u, std::move(ps.P), ps.report};
  res.u -= grad_scalar(res.phi);
  enforce_boundary(res.u);
  return res;
}

template <typename S>
struct StokesResult {
  VectorFieldT<S> u;
  ScalarFieldT<S> P;
  LinearSolveReport report;
};

/// One backward-Euler Stokes step in incremental projection form:
/// (I - mu dt Lap_h) u* = u_old + dt (f - grad_h P_old), then project;
/// P = P_old + phi / dt. With `p_old` null the previous pressure is zero.
template <typename S>
StokesResult<S> stokes_step(const VectorFieldT<S>& u_old, const VectorFieldT<S>& f, S dt, S mu,
                            const LinearSolveConfig& cfg,
                            const ScalarFieldT<S>* p_old = nullptr) {
  if (!(dt > S(0)) || !(mu >= S(0)))
    throw std::invalid_argument("stokes_step: dt must be positive and mu nonnegative");
  VectorFieldT<S> rhs = f;
  if (p_old) rhs -= grad_scalar(*p_old);
  rhs *= dt;
  rhs += u_old;
  auto hs = helmholtz_solve(rhs, mu * dt, cfg);
  auto proj = leray_project(hs.x, cfg);
  StokesResult<S> res{std::move(proj.u), std::move(proj.phi), hs.report};
  res.P *= S(1) / dt;
  if (p_old) {
    res.P += *p_old;
    detail::remove_nullspace(res.P);
  }
  res.report.merge(proj.report);
  return res;
}

/// (I - gamma dt Lap_h) F_new = F_old + dt g.
template <typename S, int R>
HelmholtzResult<Field<S, R>> heat_step(const Field<S, R>& F_old, const Field<S, R>& g, S dt,
                                        S gamma, const LinearSolveConfig& cfg) {
  if (!(dt > S(0)) || !(gamma >= S(0)))
    throw std::invalid_argument("heat_step: dt must be positive and gamma nonnegative");
  Field<S, R> rhs = F_old;
  rhs.axpy(dt, g);
  return helmholtz_solve(rhs, gamma * dt, cfg);
}

}  // namespace elflow
