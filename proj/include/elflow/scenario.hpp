#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "elflow/picard.hpp"
#include "elflow/weak.hpp"

namespace elflow {

namespace mms {
/// Manufactured 2-D solution on the unit square; F is row-major.
void exact(double x, double y, double t, double beta, double* u, double* F, double* p);
/// Body forces that make `exact` solve the coupled system.
void forcing(double x, double y, double t, double beta, double mu, double lambda, double gamma,
             double* f, double* g);
}  // namespace mms

/// A named initial-value problem with its resolution, coefficients and run length.
/// `amplitude` scales u (and F for small_vortex, beta for mms); `epsilon` is the
/// deviation of F from the identity in near_identity.
struct Scenario {
  std::string name;
  int dim = 2;
  int n = 16;
  double length = 1.0;
  Boundary boundary = Boundary::Dirichlet;
  double amplitude = 0.0;
  double epsilon = 0.0;
  double mu = 1.0;
  double lambda = 1.0;
  double gamma = 1.0;
  double t_end = 0.1;
  double dt = 1e-3;
  int snapshot_every = 0;  ///< 0: no snapshots

  Grid grid() const { return make_grid(dim, n, length, boundary); }
  /// Canonical key/value listing of every parameter.
  std::map<std::string, std::string> parameters() const;
};

const std::vector<std::string>& scenario_names();
std::string scenario_summary(const std::string& name);

/// Bundled constructor with overrides of its declared parameters. Throws
/// UnknownScenario or InvalidOverride.
Scenario build_scenario(const std::string& name,
                        const std::map<std::string, std::string>& overrides = {});

/// Initial (u, F, P) at t = 0. Except for mms, which samples the exact
/// solution, u is projected to be discretely divergence-free.
State initial_state(const Scenario& s, const LinearSolveConfig& lincfg = {});

/// Initial data in director form: d = A x + w. Available for zero,
/// small_vortex and near_identity.
DirectorState initial_director_state(const Scenario& s, const LinearSolveConfig& lincfg = {});

/// Integrator settings of the scenario, with the mms body forces attached.
PicardConfig picard_config(const Scenario& s);

WeakConfig weak_config(const Scenario& s);

/// Exact mms solution sampled on the grid; P has zero mean.
State mms_exact_state(const Scenario& s, double t);

}  // namespace elflow
