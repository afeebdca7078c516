#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "elflow/diagnostics.hpp"
#include "elflow/errors.hpp"
#include "elflow/linear_steps.hpp"

namespace elflow {

struct PicardConfig {
  double dt = 1e-3;
  double window = 0.0;  ///< 0 means one step per window
  double tol_fixed_point = 1e-10;
  int max_picard = 50;
  double mu = 1.0;
  double lambda = 1.0;
  double gamma = 1.0;
  NormExponents norms{};
  /// Optional body forces added to the momentum and F right-hand sides,
  /// evaluated at the end of each step. Only the (u, F) form accepts them.
  std::function<void(double t, VectorField& f, MatrixField& g)> source;

  double window_length() const { return window > 0.0 ? window : dt; }
  /// Sub-steps per window; throws unless the window is a whole number of steps.
  int substeps() const;
  void validate() const;
};

struct PicardTrace {
  std::vector<double> deltas;
  std::vector<double> ratios;
  bool converged = false;
  int iterations = 0;

  /// Geometric mean of the positive ratios; 0 when there are none.
  double mean_ratio() const;
  /// True when every delta after the first is strictly below its predecessor.
  bool monotone_after_first() const;
};

class PicardDivergedError : public Error {
 public:
  PicardDivergedError(double t, PicardTrace trace, const std::string& why);
  double time() const { return time_; }
  const PicardTrace& trace() const { return trace_; }

 private:
  double time_;
  PicardTrace trace_;
};

struct WindowResult {
  State state;
  PicardTrace trace;
};

/// One window of the fixed-point iteration for (u, F). The first iterate is
/// the explicit-nonlinear step from the frozen initial fields; later iterates
/// are solved for the change against the previous one. Diverges after three
/// consecutive increases of delta, or on a non-finite delta.
WindowResult picard_iterate_window(const State& initial, const PicardConfig& cfg,
                                   const LinearSolveConfig& lincfg);

/// Repeats windows until t_end. The sink receives a record of the initial
/// state and one per window. A window that fails to converge within
/// max_picard iterations raises PicardDivergedError with its start time.
State advance(State state, double t_end, const PicardConfig& cfg,
              const LinearSolveConfig& lincfg, DiagnosticsSink* sink = nullptr);

// ---------------------------------------------------------------------------
// Director form: d = A x + w with w a grid field, F = A + grad_h w.

struct DirectorState {
  double t = 0.0;
  VectorField u;
  VectorField w;
  ScalarField P;
  Eigen::MatrixXd A;

  const Grid& grid() const { return u.grid(); }
  MatrixField F() const { return director_to_F(A, w); }
  State as_state() const { return {t, u, F(), P}; }
};

/// Zero A, Even-parity w: the form used on walled grids.
DirectorState make_director_state(const State& flow, const VectorField& w,
                                  const Eigen::MatrixXd& A);

struct DirectorWindowResult {
  DirectorState state;
  PicardTrace trace;
};

/// Same iteration with the transport-diffusion equation for d in place of the
/// equation for F.
DirectorWindowResult director_iterate_window(const DirectorState& initial,
                                             const PicardConfig& cfg,
                                             const LinearSolveConfig& lincfg);

DirectorState advance_director(DirectorState state, double t_end, const PicardConfig& cfg,
                               const LinearSolveConfig& lincfg,
                               DiagnosticsSink* sink = nullptr);

// ---------------------------------------------------------------------------
// Studies

struct ContractionRow {
  double window = 0.0;
  double rho = 0.0;
  int iterations = 0;
  bool converged = false;
  PicardTrace trace;
};

struct ContractionTable {
  std::vector<ContractionRow> rows;
  double slope = 0.0;     ///< least-squares slope of log rho against log T
  double residual = 0.0;  ///< RMS residual of that fit
};

/// Runs one window of each length from `initial` and records the geometric
/// mean contraction ratio.
ContractionTable contraction_study(const State& initial, const std::vector<double>& windows,
                                   const PicardConfig& cfg, const LinearSolveConfig& lincfg);

/// Max over stored times of sqrt(||u1 - u2||^2 + ||F1 - F2||^2) along the
/// two trajectories.
double uniqueness_regression(const State& s1, const State& s2, const PicardConfig& cfg,
                             const LinearSolveConfig& lincfg, double t_end);

}  // namespace elflow
