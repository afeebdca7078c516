#include "elflow/weak.hpp"

#include <cmath>
#include <sstream>

namespace elflow {

CflError::CflError(double ratio, double limit)
    : Error(ErrorKind::CflViolated,
            [&] {
              std::ostringstream os;
              os << "advective ratio " << ratio << " exceeds " << limit;
              return os.str();
            }()),
      ratio_(ratio) {}

double cfl_ratio(const State& s, double dt) {
  return max_abs(s.u) * dt / s.grid().min_spacing();
}

State weak_step(const State& s, const WeakConfig& cfg, const LinearSolveConfig& lincfg) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("weak_step: dt must be positive");
  const double ratio = cfl_ratio(s, cfg.dt);
  if (ratio > cfg.cfl_safety) throw CflError(ratio, cfg.cfl_safety);

  VectorField f = advect(s.u, s.u);
  f *= -1.0;
  f.axpy(-cfg.lambda, elastic_stress(s.F));
  MatrixField g = advect(s.u, s.F);
  g += stretch(s.F, s.u);
  g *= -1.0;

  auto st = stokes_step(s.u, f, cfg.dt, cfg.mu, lincfg, &s.P);
  auto ht = heat_step(s.F, g, cfg.dt, cfg.gamma, lincfg);
  return {s.t + cfg.dt, std::move(st.u), std::move(ht.x), std::move(st.P)};
}

State weak_advance(State s, double t_end, const WeakConfig& cfg, const LinearSolveConfig& lincfg,
                   DiagnosticsSink* sink) {
  if (!(t_end > s.t)) throw std::invalid_argument("weak_advance: t_end must exceed the current time");
  const double r = (t_end - s.t) / cfg.dt;
  const double near = std::round(r);
  const long steps = std::max(1L, std::abs(r - near) <= 1e-9 * std::max(1.0, r)
                                      ? static_cast<long>(near)
                                      : static_cast<long>(std::ceil(r)));
  WeakConfig c = cfg;
  c.dt = (t_end - s.t) / static_cast<double>(steps);
  const double t0 = s.t;
  HAccumulator H(cfg.norms);
  if (sink) sink->emit(make_record(s, nullptr, 0, 0.0, cfg.norms, H), s);
  for (long k = 1; k <= steps; ++k) {
    State next = weak_step(s, c, lincfg);
    next.t = k == steps ? t_end : t0 + static_cast<double>(k) * c.dt;
    if (sink) sink->emit(make_record(next, &s, 0, 0.0, cfg.norms, H), next);
    s = std::move(next);
  }
  return s;
}

}  // namespace elflow
