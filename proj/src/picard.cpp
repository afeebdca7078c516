#include "elflow/picard.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace elflow {

int PicardConfig::substeps() const {
  const double r = window_length() / dt;
  const double m = std::round(r);
  if (m < 1.0 || std::abs(r - m) > 1e-9 * std::max(1.0, r))
    throw std::invalid_argument("PicardConfig: window must be a positive multiple of dt");
  return static_cast<int>(m);
}

void PicardConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("PicardConfig: dt must be positive");
  if (!(tol_fixed_point > 0.0))
    throw std::invalid_argument("PicardConfig: tol_fixed_point must be positive");
  if (max_picard < 1) throw std::invalid_argument("PicardConfig: max_picard must be >= 1");
  if (mu < 0.0 || gamma < 0.0) throw std::invalid_argument("PicardConfig: negative diffusion");
  substeps();
}

double PicardTrace::mean_ratio() const {
  double sum = 0.0;
  int n = 0;
  for (double r : ratios)
    if (r > 0.0) {
      sum += std::log(r);
      ++n;
    }
  return n == 0 ? 0.0 : std::exp(sum / n);
}

bool PicardTrace::monotone_after_first() const {
  for (std::size_t k = 2; k < deltas.size(); ++k)
    if (!(deltas[k] < deltas[k - 1])) return false;
  return true;
}

PicardDivergedError::PicardDivergedError(double t, PicardTrace trace, const std::string& why)
    : Error(ErrorKind::PicardDiverged, [&] {
        std::ostringstream os;
        os << why << " at t = " << t << " after " << trace.iterations << " iterations";
        return os.str();
      }()),
      time_(t),
      trace_(std::move(trace)) {}

namespace {

// The unknown advanced next to u, with its forcing and its map to F.
struct FModel {
  using Second = MatrixField;
  const PicardConfig& cfg;

  VectorField momentum(const VectorField& u, const MatrixField& F) const {
    VectorField f = advect(u, u);
    f *= -1.0;
    f.axpy(-cfg.lambda, elastic_stress(F));
    return f;
  }
  MatrixField transport(const VectorField& u, const MatrixField& F) const {
    MatrixField g = advect(u, F);
    g += stretch(F, u);
    g *= -1.0;
    return g;
  }
  void add_source(double t, VectorField& f, MatrixField& g) const {
    if (cfg.source) cfg.source(t, f, g);
  }
  MatrixField to_F(const MatrixField& F) const { return F; }
  MatrixField delta_F(const MatrixField& dF) const { return dF; }
};

struct DirectorModel {
  using Second = VectorField;
  const PicardConfig& cfg;
  const Eigen::MatrixXd& A;

  VectorField momentum(const VectorField& u, const VectorField& w) const {
    VectorField f = advect(u, u);
    f *= -1.0;
    f.axpy(-cfg.lambda, elastic_stress(director_to_F(A, w)));
    return f;
  }
  // -(u . grad)(A x + w)
  VectorField transport(const VectorField& u, const VectorField& w) const {
    VectorField g = advect(u, w);
    const Grid& grid = u.grid();
    if (A.size() > 0 && A.norm() > 0.0) {
      for_each_interior(grid, [&](Index idx, int, int, int) {
        for (int r = 0; r < grid.dim; ++r)
          for (int s = 0; s < grid.dim; ++s) g(r, idx) += A(r, s) * u(s, idx);
      });
      enforce_boundary(g);
    }
    g *= -1.0;
    return g;
  }
  void add_source(double, VectorField&, VectorField&) const {}
  MatrixField to_F(const VectorField& w) const { return director_to_F(A, w); }
  MatrixField delta_F(const VectorField& dw) const { return d_to_F(dw); }
};

template <class Model>
struct Trajectory {
  std::vector<VectorField> u;
  std::vector<typename Model::Second> y;
  std::vector<ScalarField> P;
};

// max_j (|u_j|_q + |F_j|_q) + (sum dt W2q(u_j)^p)^(1/p) + (sum dt W2q(F_j)^p)^(1/p)
double window_metric(const std::vector<VectorField>& u, const std::vector<MatrixField>& F,
                     double dt, NormExponents e) {
  double sup = 0.0, su = 0.0, sF = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    sup = std::max(sup, norm_Lq(u[j], e.q) + norm_Lq(F[j], e.q));
    su += dt * std::pow(norm_W2q_proxy(u[j], e.q), e.p);
    sF += dt * std::pow(norm_W2q_proxy(F[j], e.q), e.p);
  }
  return sup + std::pow(su, 1.0 / e.p) + std::pow(sF, 1.0 / e.p);
}

template <class Model>
std::pair<Trajectory<Model>, PicardTrace> iterate_window(
    const Model& model, const VectorField& u0, const typename Model::Second& y0,
    const ScalarField& P0, double t0, int m, double dt, const PicardConfig& cfg,
    const LinearSolveConfig& lincfg) {
  using Second = typename Model::Second;

  // One linear window step; linear in all of its arguments jointly.
  auto linear_step = [&](const VectorField& u_prev, const Second& y_prev,
                         const ScalarField& p_prev, const VectorField& f, const Second& g,
                         VectorField& u, Second& y, ScalarField& P) {
    auto st = stokes_step(u_prev, f, dt, cfg.mu, lincfg, &p_prev);
    auto ht = heat_step(y_prev, g, dt, cfg.gamma, lincfg);
    u = std::move(st.u);
    P = std::move(st.P);
    y = std::move(ht.x);
  };
  auto F_of = [&](const std::vector<Second>& ys, bool increment) {
    std::vector<MatrixField> out;
    out.reserve(ys.size());
    for (const auto& y : ys) out.push_back(increment ? model.delta_F(y) : model.to_F(y));
    return out;
  };

  Trajectory<Model> it;
  it.u.resize(m);
  it.y.resize(m);
  it.P.resize(m);
  std::vector<VectorField> f_prev(m, model.momentum(u0, y0));
  std::vector<Second> g_prev(m, model.transport(u0, y0));

  PicardTrace trace;
  int increases = 0;
  auto record = [&](double delta) {
    if (!trace.deltas.empty() && trace.deltas.back() > 0.0)
      trace.ratios.push_back(delta / trace.deltas.back());
    if (!std::isfinite(delta)) {
      trace.deltas.push_back(delta);
      throw PicardDivergedError(t0, trace, "non-finite iterate difference");
    }
    if (!trace.deltas.empty() && delta > trace.deltas.back()) ++increases;
    else increases = 0;
    trace.deltas.push_back(delta);
    if (increases >= 3)
      throw PicardDivergedError(t0, trace, "iterate difference grew three times in a row");
  };

  // First iterate: forcing from the frozen initial fields.
  {
    std::vector<VectorField> du(m);
    std::vector<Second> dy(m);
    for (int j = 0; j < m; ++j) {
      // The prescribed sources are the same in every iterate, so they enter
      // here only and cancel from the increments.
      VectorField f = f_prev[j];
      Second g = g_prev[j];
      model.add_source(t0 + (j + 1) * dt, f, g);
      linear_step(j == 0 ? u0 : it.u[j - 1], j == 0 ? y0 : it.y[j - 1],
                  j == 0 ? P0 : it.P[j - 1], f, g, it.u[j], it.y[j], it.P[j]);
      du[j] = it.u[j] - u0;
      dy[j] = it.y[j] - y0;
    }
    trace.iterations = 1;
    const double delta = window_metric(du, F_of(dy, true), dt, cfg.norms);
    record(delta);
    if (delta <= cfg.tol_fixed_point * window_metric(it.u, F_of(it.y, false), dt, cfg.norms)) {
      trace.converged = true;
      return {std::move(it), std::move(trace)};
    }
  }

  while (trace.iterations < cfg.max_picard) {
    std::vector<VectorField> du(m);
    std::vector<Second> dy(m);
    std::vector<ScalarField> dP(m);
    const VectorField zero_u(u0.grid(), u0.parity());
    const Second zero_y(y0.grid(), y0.parity());
    const ScalarField zero_P(P0.grid(), P0.parity());
    for (int j = 0; j < m; ++j) {
      VectorField f = model.momentum(it.u[j], it.y[j]);
      Second g = model.transport(it.u[j], it.y[j]);
      linear_step(j == 0 ? zero_u : du[j - 1], j == 0 ? zero_y : dy[j - 1],
                  j == 0 ? zero_P : dP[j - 1], f - f_prev[j], g - g_prev[j], du[j], dy[j],
                  dP[j]);
      f_prev[j] = std::move(f);
      g_prev[j] = std::move(g);
    }
    for (int j = 0; j < m; ++j) {
      it.u[j] += du[j];
      it.y[j] += dy[j];
      it.P[j] += dP[j];
    }
    ++trace.iterations;
    const double delta = window_metric(du, F_of(dy, true), dt, cfg.norms);
    record(delta);
    if (delta <= cfg.tol_fixed_point * window_metric(it.u, F_of(it.y, false), dt, cfg.norms)) {
      trace.converged = true;
      break;
    }
  }
  return {std::move(it), std::move(trace)};
}

// Step schedule of a run: total steps and their length, so that the final
// time is hit exactly.
struct Schedule {
  long steps;
  double dt;
};

Schedule schedule(double t0, double t_end, double dt) {
  if (!(t_end > t0)) throw std::invalid_argument("advance: t_end must exceed the current time");
  const double r = (t_end - t0) / dt;
  const double near = std::round(r);
  const long n = std::abs(r - near) <= 1e-9 * std::max(1.0, r) ? static_cast<long>(near)
                                                                 : static_cast<long>(std::ceil(r));
  return {std::max(1L, n), (t_end - t0) / std::max(1L, n)};
}

// Drives windows of `step_window(state, m, dt) -> (state, trace)` to t_end.
template <class S, class Step, class ToState>
S run_windows(S state, double t_end, const PicardConfig& cfg, DiagnosticsSink* sink,
              Step&& step_window, ToState&& to_state) {
  cfg.validate();
  const Schedule sch = schedule(state.t, t_end, cfg.dt);
  const int m = cfg.substeps();
  const double t0 = state.t;
  HAccumulator H(cfg.norms);
  State prev = to_state(state);
  if (sink) sink->emit(make_record(prev, nullptr, 0, 0.0, cfg.norms, H), prev);
  long done = 0;
  while (done < sch.steps) {
    const int sub = static_cast<int>(std::min<long>(m, sch.steps - done));
    auto [next, trace] = step_window(state, sub, sch.dt);
    done += sub;
    next.t = done == sch.steps ? t_end : t0 + static_cast<double>(done) * sch.dt;
    if (!trace.converged)
      throw PicardDivergedError(state.t, trace, "no convergence within max_picard iterations");
    state = std::move(next);
    State cur = to_state(state);
    if (sink) {
      const double ratio = trace.ratios.empty() ? 0.0 : trace.ratios.back();
      sink->emit(make_record(cur, &prev, trace.iterations, ratio, cfg.norms, H), cur);
    }
    prev = std::move(cur);
  }
  return state;
}

WindowResult f_window(const State& s, int m, double dt, const PicardConfig& cfg,
                      const LinearSolveConfig& lincfg) {
  FModel model{cfg};
  auto [traj, trace] = iterate_window(model, s.u, s.F, s.P, s.t, m, dt, cfg, lincfg);
  State out{s.t + m * dt, std::move(traj.u.back()), std::move(traj.y.back()),
            std::move(traj.P.back())};
  return {std::move(out), std::move(trace)};
}

DirectorWindowResult d_window(const DirectorState& s, int m, double dt, const PicardConfig& cfg,
                              const LinearSolveConfig& lincfg) {
  DirectorModel model{cfg, s.A};
  auto [traj, trace] = iterate_window(model, s.u, s.w, s.P, s.t, m, dt, cfg, lincfg);
  DirectorState out{s.t + m * dt, std::move(traj.u.back()), std::move(traj.y.back()),
                    std::move(traj.P.back()), s.A};
  return {std::move(out), std::move(trace)};
}

}  // namespace

WindowResult picard_iterate_window(const State& initial, const PicardConfig& cfg,
                                   const LinearSolveConfig& lincfg) {
  cfg.validate();
  return f_window(initial, cfg.substeps(), cfg.dt, cfg, lincfg);
}

State advance(State state, double t_end, const PicardConfig& cfg,
              const LinearSolveConfig& lincfg, DiagnosticsSink* sink) {
  return run_windows(
      std::move(state), t_end, cfg, sink,
      [&](const State& s, int m, double dt) {
        auto r = f_window(s, m, dt, cfg, lincfg);
        return std::make_pair(std::move(r.state), std::move(r.trace));
      },
      [](const State& s) { return s; });
}

DirectorState make_director_state(const State& flow, const VectorField& w,
                                  const Eigen::MatrixXd& A) {
  DirectorState d{flow.t, flow.u, w, flow.P, A};
  if (d.A.size() == 0) d.A = Eigen::MatrixXd::Zero(flow.grid().dim, flow.grid().dim);
  return d;
}

DirectorWindowResult director_iterate_window(const DirectorState& initial,
                                             const PicardConfig& cfg,
                                             const LinearSolveConfig& lincfg) {
  cfg.validate();
  if (cfg.source) throw std::invalid_argument("director form takes no body forces");
  return d_window(initial, cfg.substeps(), cfg.dt, cfg, lincfg);
}

DirectorState advance_director(DirectorState state, double t_end, const PicardConfig& cfg,
                               const LinearSolveConfig& lincfg, DiagnosticsSink* sink) {
  if (cfg.source) throw std::invalid_argument("director form takes no body forces");
  return run_windows(
      std::move(state), t_end, cfg, sink,
      [&](const DirectorState& s, int m, double dt) {
        auto r = d_window(s, m, dt, cfg, lincfg);
        return std::make_pair(std::move(r.state), std::move(r.trace));
      },
      [](const DirectorState& s) { return s.as_state(); });
}

ContractionTable contraction_study(const State& initial, const std::vector<double>& windows,
                                   const PicardConfig& cfg, const LinearSolveConfig& lincfg) {
  if (windows.empty()) throw std::invalid_argument("contraction_study: no windows");
  if (!std::is_sorted(windows.begin(), windows.end()))
    throw std::invalid_argument("contraction_study: windows must be ascending");
  ContractionTable table;
  for (double T : windows) {
    PicardConfig c = cfg;
    c.window = T;
    auto r = picard_iterate_window(initial, c, lincfg);
    table.rows.push_back(
        {T, r.trace.mean_ratio(), r.trace.iterations, r.trace.converged, r.trace});
  }
  // Least-squares fit of log rho = a + slope log T over rows with rho > 0.
  std::vector<double> x, y;
  for (const auto& row : table.rows)
    if (row.rho > 0.0) {
      x.push_back(std::log(row.window));
      y.push_back(std::log(row.rho));
    }
  if (x.size() >= 2) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mx += x[i] / n;
      my += y[i] / n;
    }
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
    }
    table.slope = sxy / sxx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - (my + table.slope * (x[i] - mx));
      ss += e * e;
    }
    table.residual = std::sqrt(ss / n);
  }
  return table;
}

double uniqueness_regression(const State& s1, const State& s2, const PicardConfig& cfg,
                             const LinearSolveConfig& lincfg, double t_end) {
  if (s1.grid() != s2.grid())
    throw FieldError("uniqueness_regression: states live on different grids");
  SeriesSink a(true), b(true);
  advance(s1, t_end, cfg, lincfg, &a);
  advance(s2, t_end, cfg, lincfg, &b);
  double worst = 0.0;
  for (std::size_t k = 0; k < std::min(a.states.size(), b.states.size()); ++k) {
    const VectorField du = a.states[k].u - b.states[k].u;
    const MatrixField dF = a.states[k].F - b.states[k].F;
    worst = std::max(worst, std::sqrt(dot(du, du) + dot(dF, dF)));
  }
  return worst;
}

}  // namespace elflow
