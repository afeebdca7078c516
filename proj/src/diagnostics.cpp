#include "elflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace elflow {

double energy(const State& s) { return 0.5 * (dot(s.u, s.u) + dot(s.F, s.F)); }

double dissipation(const State& s) {
  return face_gradient_energy(s.u) + face_gradient_energy(s.F);
}

const std::vector<std::string>& record_field_names() {
  static const std::vector<std::string> names = {
      "t",           "energy",       "dissipation",   "div_residual",  "pressure_mean",
      "picard_iters", "picard_ratio", "norm_u_Lq",     "norm_F_Lq",     "norm_u_W1q",
      "norm_F_W1q",  "norm_u_W2q",   "norm_F_W2q",    "norm_dudt_Lq",  "norm_dFdt_Lq",
      "norm_gradP_Lq", "H_value",    "curl_residual_F", "grad_u_Linf", "grad_F_Linf",
      "F_Linf"};
  return names;
}

std::vector<double> record_values(const DiagnosticsRecord& r) {
  return {r.t,           r.energy,       r.dissipation,  r.div_residual, r.pressure_mean,
          static_cast<double>(r.picard_iters), r.picard_ratio, r.norm_u_Lq, r.norm_F_Lq,
          r.norm_u_W1q,  r.norm_F_W1q,   r.norm_u_W2q,   r.norm_F_W2q,   r.norm_dudt_Lq,
          r.norm_dFdt_Lq, r.norm_gradP_Lq, r.H_value,    r.curl_residual_F, r.grad_u_Linf,
          r.grad_F_Linf, r.F_Linf};
}

DiagnosticsRecord record_from_values(const std::vector<double>& v) {
  if (v.size() != record_field_names().size())
    throw std::invalid_argument("record_from_values: wrong number of values");
  DiagnosticsRecord r;
  std::size_t i = 0;
  r.t = v[i++];
  r.energy = v[i++];
  r.dissipation = v[i++];
  r.div_residual = v[i++];
  r.pressure_mean = v[i++];
  r.picard_iters = static_cast<int>(v[i++]);
  r.picard_ratio = v[i++];
  r.norm_u_Lq = v[i++];
  r.norm_F_Lq = v[i++];
  r.norm_u_W1q = v[i++];
  r.norm_F_W1q = v[i++];
  r.norm_u_W2q = v[i++];
  r.norm_F_W2q = v[i++];
  r.norm_dudt_Lq = v[i++];
  r.norm_dFdt_Lq = v[i++];
  r.norm_gradP_Lq = v[i++];
  r.H_value = v[i++];
  r.curl_residual_F = v[i++];
  r.grad_u_Linf = v[i++];
  r.grad_F_Linf = v[i++];
  r.F_Linf = v[i++];
  return r;
}

double HAccumulator::add(const DiagnosticsRecord& r) {
  if (started_) {
    const double dt = r.t - last_t_;
    const double p = e_.p;
    sum_u_ += dt * std::pow(r.norm_u_W2q, p);
    sum_F_ += dt * std::pow(r.norm_F_W2q, p);
    sum_dudt_ += dt * std::pow(r.norm_dudt_Lq, p);
    sum_dFdt_ += dt * std::pow(r.norm_dFdt_Lq, p);
    sum_gradP_ += dt * std::pow(r.norm_gradP_Lq, p);
  }
  started_ = true;
  last_t_ = r.t;
  sup_u_ = std::max(sup_u_, r.norm_u_W1q);
  sup_F_ = std::max(sup_F_, r.norm_F_W1q);
  return value();
}

double HAccumulator::value() const {
  const double ip = 1.0 / e_.p;
  return std::pow(sum_u_, ip) + std::pow(sum_dudt_, ip) + std::pow(sum_gradP_, ip) +
         std::pow(sum_F_, ip) + std::pow(sum_dFdt_, ip) + sup_u_ + sup_F_;
}

DiagnosticsRecord make_record(const State& s, const State* prev, int picard_iters,
                              double picard_ratio, NormExponents e, HAccumulator& H) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.energy = energy(s);
  r.dissipation = dissipation(s);
  r.div_residual = max_abs(div_vector(s.u));
  r.pressure_mean = interior_mean(s.P);
  r.picard_iters = picard_iters;
  r.picard_ratio = picard_ratio;
  r.norm_u_Lq = norm_Lq(s.u, e.q);
  r.norm_F_Lq = norm_Lq(s.F, e.q);
  r.norm_u_W1q = norm_W1q_proxy(s.u, e.q);
  r.norm_F_W1q = norm_W1q_proxy(s.F, e.q);
  r.norm_u_W2q = norm_W2q_proxy(s.u, e.q);
  r.norm_F_W2q = norm_W2q_proxy(s.F, e.q);
  if (prev && s.t > prev->t) {
    const double inv = 1.0 / (s.t - prev->t);
    r.norm_dudt_Lq = norm_Lq(VectorField(inv * (s.u - prev->u)), e.q);
    r.norm_dFdt_Lq = norm_Lq(MatrixField(inv * (s.F - prev->F)), e.q);
  }
  r.norm_gradP_Lq = norm_Lq(grad_scalar(s.P), e.q);
  r.curl_residual_F = curl_residual(s.F);
  r.grad_u_Linf = grad_Linf(s.u);
  r.grad_F_Linf = grad_Linf(s.F);
  r.F_Linf = norm_Lq(s.F, std::numeric_limits<double>::infinity());
  r.H_value = H.add(r);
  return r;
}

void SeriesSink::emit(const DiagnosticsRecord& r, const State& s) {
  records.push_back(r);
  if (keep_states_) states.push_back(s);
}

namespace {

void require_nonempty(const std::vector<DiagnosticsRecord>& s, const char* who) {
  if (s.empty()) throw Error(ErrorKind::EmptySeries, who);
}

}  // namespace

double H_functional(const std::vector<DiagnosticsRecord>& series, NormExponents e) {
  require_nonempty(series, "H_functional");
  HAccumulator acc(e);
  for (const auto& r : series) acc.add(r);
  return acc.value();
}

EnergyMarginReport energy_inequality_check(const std::vector<DiagnosticsRecord>& series,
                                           double tol_E) {
  require_nonempty(series, "energy_inequality_check");
  EnergyMarginReport rep;
  const double E0 = series.front().energy;
  double dissipated = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (k > 0) dissipated += (series[k].t - series[k - 1].t) * series[k].dissipation;
    const double m = E0 - series[k].energy - dissipated;
    rep.times.push_back(series[k].t);
    rep.margins.push_back(m);
    rep.worst = k == 0 ? m : std::min(rep.worst, m);
  }
  rep.pass = rep.worst >= -tol_E;
  return rep;
}

double gronwall_rate(const DiagnosticsRecord& r, double C_env) {
  return r.grad_u_Linf + r.grad_F_Linf + C_env * r.F_Linf * r.F_Linf;
}

double integrability_check(const std::vector<DiagnosticsRecord>& series, double C_env) {
  require_nonempty(series, "integrability_check");
  double sum = 0.0;
  for (std::size_t k = 1; k < series.size(); ++k)
    sum += 0.5 * (series[k].t - series[k - 1].t) *
           (gronwall_rate(series[k], C_env) + gronwall_rate(series[k - 1], C_env));
  return sum;
}

GronwallEnvelope gronwall_envelope(const std::vector<DiagnosticsRecord>& strong, double X0,
                                   double C_env) {
  require_nonempty(strong, "gronwall_envelope");
  GronwallEnvelope env;
  double integral = 0.0;
  for (std::size_t k = 0; k < strong.size(); ++k) {
    const double G = gronwall_rate(strong[k], C_env);
    if (k > 0)
      integral += 0.5 * (strong[k].t - strong[k - 1].t) *
                  (G + gronwall_rate(strong[k - 1], C_env));
    env.times.push_back(strong[k].t);
    env.G_values.push_back(G);
    env.envelope.push_back(X0 * std::exp(integral));
  }
  return env;
}

GronwallReport gronwall_compare(const std::vector<DiagnosticsRecord>& strong,
                                const std::vector<DiagnosticsRecord>& weak,
                                const std::vector<State>& states_s,
                                const std::vector<State>& states_w,
                                const GronwallOptions& opt) {
  require_nonempty(strong, "gronwall_compare");
  require_nonempty(weak, "gronwall_compare");
  const std::size_t n = strong.size();
  if (weak.size() != n || states_s.size() != n || states_w.size() != n)
    throw Error(ErrorKind::MismatchedSeries, "series lengths differ");
  for (std::size_t k = 0; k < n; ++k) {
    const double scale = std::max(1.0, std::abs(strong[k].t));
    if (std::abs(strong[k].t - weak[k].t) > 1e-12 * scale ||
        std::abs(states_s[k].t - strong[k].t) > 1e-12 * scale ||
        std::abs(states_w[k].t - weak[k].t) > 1e-12 * scale)
      throw Error(ErrorKind::MismatchedSeries, "time stamps differ at index " + std::to_string(k));
  }

  GronwallReport rep;
  rep.envelope = gronwall_envelope(strong, 0.0, opt.C_env);
  const double defect = opt.A * (opt.dt + opt.h * opt.h) * (opt.dt + opt.h * opt.h);
  double integral = 0.0, dissipated = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const VectorField du = states_s[k].u - states_w[k].u;
    const MatrixField dF = states_s[k].F - states_w[k].F;
    if (k > 0) {
      const double dt = strong[k].t - strong[k - 1].t;
      integral += 0.5 * dt * (rep.envelope.G_values[k] + rep.envelope.G_values[k - 1]);
      dissipated += dt * (face_gradient_energy(du) + face_gradient_energy(dF));
    }
    const double dist = 0.5 * (dot(du, du) + dot(dF, dF));
    const double X = dist + 0.5 * dissipated;
    const double bound = defect * std::exp(integral);
    rep.times.push_back(strong[k].t);
    rep.distance.push_back(dist);
    rep.X.push_back(X);
    rep.bound.push_back(bound);
    rep.max_X = std::max(rep.max_X, X);
    if (X > bound && !rep.first_violation) rep.first_violation = k;
  }
  rep.pass = !rep.first_violation.has_value();
  return rep;
}

}  // namespace elflow
