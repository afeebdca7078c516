#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "elflow/errors.hpp"
#include "elflow/operators.hpp"

namespace elflow {

// ---------------------------------------------------------------------------
// Discrete norms

/// (sum |f|^q cellvol)^{1/q} with |f| the pointwise Euclidean (Frobenius)
/// norm over components; the max-norm for q = infinity.
template <typename S, int R>
S norm_Lq(const Field<S, R>& f, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("norm_Lq: q must be >= 1");
  const bool inf = std::isinf(q);
  S acc = 0;
  for_each_interior(f.grid(), [&](Index idx, int, int, int) {
    const S m = std::sqrt(f.data().col(idx).square().sum());
    if (inf) acc = std::max(acc, m);
    else acc += std::pow(m, static_cast<S>(q));
  });
  if (inf) return acc;
  return std::pow(acc * static_cast<S>(f.grid().cell_volume()), static_cast<S>(1.0 / q));
}

namespace detail {

/// Pointwise Frobenius norm of all centered first differences.
template <typename S, int R>
ScalarFieldT<S> gradient_magnitude(const Field<S, R>& f) {
  const Grid& g = f.grid();
  const auto st = axis_stencil<S>(g);
  ScalarFieldT<S> out(g);
  for_each_interior(g, [&](Index idx, int, int, int) {
    S sum = 0;
    for (int c = 0; c < f.components(); ++c)
      for (int a = 0; a < g.dim; ++a) {
        const S d = centered(f.data(), c, idx, st.stride[a]) * st.inv_2h[a];
        sum += d * d;
      }
    out(0, idx) = std::sqrt(sum);
  });
  return out;
}

/// Pointwise Frobenius norm of the full discrete Hessian: compact second
/// differences on the diagonal, centered cross differences off it.
template <typename S, int R>
ScalarFieldT<S> hessian_magnitude(const Field<S, R>& f) {
  const Grid& g = f.grid();
  const auto st = axis_stencil<S>(g);
  const auto& d = f.data();
  ScalarFieldT<S> out(g);
  for_each_interior(g, [&](Index idx, int, int, int) {
    S sum = 0;
    for (int c = 0; c < f.components(); ++c)
      for (int a = 0; a < g.dim; ++a)
        for (int b = 0; b < g.dim; ++b) {
          S v;
          if (a == b) {
            const Index s = st.stride[a];
            v = (d(c, idx + s) - S(2) * d(c, idx) + d(c, idx - s)) * st.inv_h2[a];
          } else {
            const Index sa = st.stride[a], sb = st.stride[b];
            v = (d(c, idx + sa + sb) - d(c, idx + sa - sb) - d(c, idx - sa + sb) +
                 d(c, idx - sa - sb)) *
                st.inv_2h[a] * st.inv_2h[b];
          }
          sum += v * v;
        }
    out(0, idx) = std::sqrt(sum);
  });
  return out;
}

}  // namespace detail

/// ||f||_q + ||grad_h f||_q: the low-order proxy standing in for the
/// interpolation-space norms.
template <typename S, int R>
S norm_W1q_proxy(const Field<S, R>& f, double q) {
  return norm_Lq(f, q) + norm_Lq(detail::gradient_magnitude(f), q);
}

/// ||f||_q + ||grad_h f||_q + ||D^2_h f||_q.
template <typename S, int R>
S norm_W2q_proxy(const Field<S, R>& f, double q) {
  return norm_W1q_proxy(f, q) + norm_Lq(detail::hessian_magnitude(f), q);
}

/// max over cells of the Frobenius norm of grad_h f.
template <typename S, int R>
S grad_Linf(const Field<S, R>& f) {
  return max_abs(detail::gradient_magnitude(f));
}

/// Sum over cell faces of |jump / h|^2 times the cell volume; Dirichlet wall
/// faces count with weight 1/2, so for every field dissipation_part(f)
/// equals -<Lap_h f, f> exactly.
template <typename S, int R>
S face_gradient_energy(const Field<S, R>& f) {
  const Grid& g = f.grid();
  const auto& d = f.data();
  const bool walls = g.boundary == Boundary::Dirichlet;
  S sum = 0;
  for_each_interior(g, [&](Index idx, int i, int j, int k) {
    const int p[3] = {i, j, k};
    for (int a = 0; a < g.dim; ++a) {
      const Index s = g.stride(a);
      const S w = S(1) / static_cast<S>(g.h[a] * g.h[a]);
      const bool last = p[a] == g.n[a] - 1;
      if (!last || !walls) sum += (d.col(idx + s) - d.col(idx)).square().sum() * w;
      if (walls && p[a] == 0) sum += S(0.5) * (d.col(idx) - d.col(idx - s)).square().sum() * w;
      if (walls && last) sum += S(0.5) * (d.col(idx + s) - d.col(idx)).square().sum() * w;
    }
  });
  return sum * static_cast<S>(g.cell_volume());
}

// ---------------------------------------------------------------------------
// Energy law

/// 1/2 sum (|u|^2 + |F|^2) cellvol.
double energy(const State& s);
/// sum (|grad u|^2 + |grad F|^2) cellvol with face differences.
double dissipation(const State& s);

// ---------------------------------------------------------------------------
// Per-step records

struct DiagnosticsRecord {
  double t = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  double div_residual = 0.0;
  double pressure_mean = 0.0;
  int picard_iters = 0;
  double picard_ratio = 0.0;
  double norm_u_Lq = 0.0;
  double norm_F_Lq = 0.0;
  double norm_u_W1q = 0.0;
  double norm_F_W1q = 0.0;
  double norm_u_W2q = 0.0;
  double norm_F_W2q = 0.0;
  double norm_dudt_Lq = 0.0;
  double norm_dFdt_Lq = 0.0;
  double norm_gradP_Lq = 0.0;
  double H_value = 0.0;
  double curl_residual_F = 0.0;
  double grad_u_Linf = 0.0;
  double grad_F_Linf = 0.0;
  double F_Linf = 0.0;
};

/// Field names in CSV column order.
const std::vector<std::string>& record_field_names();
std::vector<double> record_values(const DiagnosticsRecord& r);
DiagnosticsRecord record_from_values(const std::vector<double>& v);

struct NormExponents {
  double p = 2.0;
  double q = 6.0;
};

/// Running form of H_functional: feeding the records of a series in order
/// yields, after each record, the value H_functional returns on that prefix.
class HAccumulator {
 public:
  explicit HAccumulator(NormExponents e = {}) : e_(e) {}
  double add(const DiagnosticsRecord& r);
  double value() const;

 private:
  NormExponents e_;
  bool started_ = false;
  double last_t_ = 0.0;
  double sum_u_ = 0, sum_dudt_ = 0, sum_gradP_ = 0, sum_F_ = 0, sum_dFdt_ = 0;
  double sup_u_ = 0, sup_F_ = 0;
};

/// Builds the record of `s`; `prev` supplies the snapshot for time differences.
DiagnosticsRecord make_record(const State& s, const State* prev, int picard_iters,
                              double picard_ratio, NormExponents e, HAccumulator& H);

/// Receiver of per-window records emitted by the integrators.
class DiagnosticsSink {
 public:
  virtual ~DiagnosticsSink() = default;
  virtual void emit(const DiagnosticsRecord& r, const State& s) = 0;
};

/// Keeps every record, and optionally every state.
class SeriesSink : public DiagnosticsSink {
 public:
  explicit SeriesSink(bool keep_states = false) : keep_states_(keep_states) {}
  void emit(const DiagnosticsRecord& r, const State& s) override;

  std::vector<DiagnosticsRecord> records;
  std::vector<State> states;

 private:
  bool keep_states_;
};

// ---------------------------------------------------------------------------
// Series functionals

/// Composite existence functional over the whole series: p-norms in time of
/// the W2q proxies of u and F, of the snapshot time differences of u and F and
/// of grad P, plus the sup in time of the W1q proxies of u and F.
double H_functional(const std::vector<DiagnosticsRecord>& series, NormExponents e = {});

struct EnergyMarginReport {
  std::vector<double> times;
  std::vector<double> margins;  ///< E(0) - E(t) - sum dt D
  double worst = 0.0;
  bool pass = true;
};

/// Margins of the energy inequality with right-endpoint dissipation sums;
/// passes iff the worst margin is >= -tol_E.
EnergyMarginReport energy_inequality_check(const std::vector<DiagnosticsRecord>& series,
                                           double tol_E);

/// G(t) = ||grad u||_inf + ||grad F||_inf + C_env ||F||_inf^2.
double gronwall_rate(const DiagnosticsRecord& r, double C_env = 1.0);

/// Trapezoidal time integral of G over the series.
double integrability_check(const std::vector<DiagnosticsRecord>& series, double C_env = 1.0);

struct GronwallEnvelope {
  std::vector<double> times;
  std::vector<double> G_values;
  std::vector<double> envelope;  ///< X(0) exp(int_0^t G)
};

GronwallEnvelope gronwall_envelope(const std::vector<DiagnosticsRecord>& strong, double X0,
                                   double C_env = 1.0);

struct GronwallOptions {
  double C_env = 1.0;
  double A = 1.0;   ///< frozen calibration constant of the consistency envelope
  double dt = 0.0;
  double h = 0.0;
};

struct GronwallReport {
  std::vector<double> times;
  std::vector<double> X;            ///< 1/2||du||^2 + 1/2||dF||^2 + 1/2 sum dt D(du, dF)
  std::vector<double> distance;     ///< 1/2||du||^2 + 1/2||dF||^2 alone
  std::vector<double> bound;        ///< A (dt + h^2)^2 exp(int_0^t G)
  GronwallEnvelope envelope;
  double max_X = 0.0;
  std::optional<std::size_t> first_violation;
  bool pass = true;
};

/// Compares two trajectories started from identical data against the
/// consistency-defect envelope.
GronwallReport gronwall_compare(const std::vector<DiagnosticsRecord>& strong,
                                const std::vector<DiagnosticsRecord>& weak,
                                const std::vector<State>& states_s,
                                const std::vector<State>& states_w,
                                const GronwallOptions& opt);

}  // namespace elflow
