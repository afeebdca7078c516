#include "elflow/oracle/newton.hpp"

namespace elflow::oracle {

namespace {

VectorXd stack(const MatrixXd& u, const MatrixXd& F) {
  VectorXd z(u.size() + F.size());
  Index m = 0;
  for (Index r = 0; r < u.rows(); ++r)
    for (Index c = 0; c < u.cols(); ++c) z[m++] = u(r, c);
  for (Index r = 0; r < F.rows(); ++r)
    for (Index c = 0; c < F.cols(); ++c) z[m++] = F(r, c);
  return z;
}

void unstack(const VectorXd& z, MatrixXd& u, MatrixXd& F) {
  Index m = 0;
  for (Index r = 0; r < u.rows(); ++r)
    for (Index c = 0; c < u.cols(); ++c) u(r, c) = z[m++];
  for (Index r = 0; r < F.rows(); ++r)
    for (Index c = 0; c < F.cols(); ++c) F(r, c) = z[m++];
}

}  // namespace

MonolithicBackwardEuler::MonolithicBackwardEuler(const Grid& g, double dt, double mu,
                                                 double lambda, double gamma)
    : ops_(g), dt_(dt), mu_(mu), lambda_(lambda), gamma_(gamma) {
  const Index N = g.cells();
  const MatrixXd I = MatrixXd::Identity(N, N);
  helm_u_inv_ = (I - mu * dt * ops_.lap(Parity::Odd)).inverse();
  helm_F_inv_ = (I - gamma * dt * ops_.lap(Parity::Odd)).inverse();
  MatrixXd DG = MatrixXd::Zero(N, N);
  for (int a = 0; a < g.dim; ++a) DG += ops_.D(a, Parity::Odd) * ops_.D(a, Parity::Even);
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(DG);
  cod.setThreshold(1e-10);
  neg_pressure_pinv_ = cod.pseudoInverse();
}

std::pair<MatrixXd, VectorXd> MonolithicBackwardEuler::project(const MatrixXd& u_star) const {
  const Grid& g = ops_.grid();
  VectorXd div = VectorXd::Zero(g.cells());
  for (int a = 0; a < g.dim; ++a) div += ops_.D(a, Parity::Odd) * u_star.row(a).transpose();
  const VectorXd phi = neg_pressure_pinv_ * div;
  MatrixXd u = u_star;
  for (int a = 0; a < g.dim; ++a) u.row(a) -= (ops_.D(a, Parity::Even) * phi).transpose();
  return {u, phi};
}

MatrixXd MonolithicBackwardEuler::momentum(const MatrixXd& u, const MatrixXd& F) const {
  return -ops_.advect(u, u, Parity::Odd) - lambda_ * ops_.elastic_stress(F);
}

MatrixXd MonolithicBackwardEuler::transport(const MatrixXd& u, const MatrixXd& F) const {
  return -ops_.advect(u, F, Parity::Odd) - ops_.stretch(F, u);
}

VectorXd MonolithicBackwardEuler::residual(const VectorXd& z, const MatrixXd& u_old,
                                           const MatrixXd& F_old, const MatrixXd& P_old) const {
  MatrixXd u(u_old.rows(), u_old.cols()), F(F_old.rows(), F_old.cols());
  unstack(z, u, F);
  MatrixXd rhs = u_old + dt_ * (momentum(u, F) - ops_.grad_scalar(P_old));
  const MatrixXd u_star = rhs * helm_u_inv_.transpose();
  const MatrixXd u_new = project(u_star).first;
  const MatrixXd F_new = (F_old + dt_ * transport(u, F)) * helm_F_inv_.transpose();
  return stack(u - u_new, F - F_new);
}

MonolithicSolution MonolithicBackwardEuler::solve(const State& old, int max_newton,
                                                  double tol) const {
  const MatrixXd u_old = to_dense(old.u), F_old = to_dense(old.F), P_old = to_dense(old.P);
  VectorXd z = stack(u_old, F_old);
  const double scale = std::max(1.0, z.cwiseAbs().maxCoeff());
  MonolithicSolution sol;
  VectorXd R = residual(z, u_old, F_old, P_old);
  while (sol.iterations < max_newton && R.cwiseAbs().maxCoeff() > tol * scale) {
    MatrixXd J(z.size(), z.size());
    for (Index c = 0; c < z.size(); ++c) {
      const double e = 1e-6 * std::max(1.0, std::abs(z[c]));
      VectorXd zp = z, zm = z;
      zp[c] += e;
      zm[c] -= e;
      J.col(c) = (residual(zp, u_old, F_old, P_old) - residual(zm, u_old, F_old, P_old)) / (2 * e);
    }
    z -= J.partialPivLu().solve(R);
    R = residual(z, u_old, F_old, P_old);
    ++sol.iterations;
  }
  sol.residual = R.cwiseAbs().maxCoeff();
  sol.u = u_old;
  sol.F = F_old;
  unstack(z, sol.u, sol.F);
  const MatrixXd rhs =
      u_old + dt_ * (momentum(sol.u, sol.F) - ops_.grad_scalar(P_old));
  const VectorXd phi = project(rhs * helm_u_inv_.transpose()).second;
  sol.P = P_old + (phi / dt_).transpose();
  return sol;
}

}  // namespace elflow::oracle
