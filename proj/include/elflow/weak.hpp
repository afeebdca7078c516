#pragma once

#include "elflow/diagnostics.hpp"
#include "elflow/linear_steps.hpp"

namespace elflow {

/// Reference integrator with explicit nonlinear terms and implicit diffusion.
struct WeakConfig {
  double dt = 1e-3;
  double mu = 1.0;
  double lambda = 1.0;
  double gamma = 1.0;
  double cfl_safety = 0.5;
  NormExponents norms{};
};

class CflError : public Error {
 public:
  CflError(double ratio, double limit);
  double ratio() const { return ratio_; }

 private:
  double ratio_;
};

/// max|u| dt / h_min.
double cfl_ratio(const State& s, double dt);

/// One step: stokes_step with the forcing of the old state, then heat_step
/// for F with its transport terms at the old state. Throws CflError when the
/// advective ratio exceeds cfl_safety.
State weak_step(const State& s, const WeakConfig& cfg, const LinearSolveConfig& lincfg);

/// Steps to t_end; the sink receives the initial record and one per step.
State weak_advance(State s, double t_end, const WeakConfig& cfg, const LinearSolveConfig& lincfg,
                   DiagnosticsSink* sink = nullptr);

}  // namespace elflow
