#pragma once

#include "elflow/oracle/dense.hpp"

namespace elflow::oracle {

struct MonolithicSolution {
  MatrixXd u, F, P;  ///< interior values, components x cells
  int iterations = 0;
  double residual = 0.0;
};

/// Fully implicit backward-Euler step of the coupled system in the same
/// incremental-projection form as the production step, solved as one
/// nonlinear system by Newton's method with a central-difference Jacobian.
/// Dense throughout: intended for grids of at most a few hundred cells.
class MonolithicBackwardEuler {
 public:
  MonolithicBackwardEuler(const Grid& g, double dt, double mu, double lambda, double gamma);

  /// Residual of the stacked unknowns z = (u rows, F rows).
  VectorXd residual(const VectorXd& z, const MatrixXd& u_old, const MatrixXd& F_old,
                    const MatrixXd& P_old) const;

  MonolithicSolution solve(const State& old, int max_newton = 30, double tol = 1e-14) const;

 private:
  // u* -> (projected u, phi)
  std::pair<MatrixXd, VectorXd> project(const MatrixXd& u_star) const;
  MatrixXd momentum(const MatrixXd& u, const MatrixXd& F) const;
  MatrixXd transport(const MatrixXd& u, const MatrixXd& F) const;

  DenseOperators ops_;
  double dt_, mu_, lambda_, gamma_;
  MatrixXd helm_u_inv_, helm_F_inv_, neg_pressure_pinv_;
};

}  // namespace elflow::oracle
