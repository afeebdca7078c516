#include "doctest.h"

#include <limits>

#include "elflow/diagnostics.hpp"
#include "test_support.hpp"

using namespace elflow;
using test::kPi;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

State random_state(const Grid& g, std::mt19937_64& rng) {
  State s = zero_state(g);
  s.u = test::random_field<VectorField>(g, rng);
  s.F = test::random_field<MatrixField>(g, rng);
  return s;
}

std::vector<DiagnosticsRecord> ramp_series(int n, double dt) {
  std::vector<DiagnosticsRecord> out;
  for (int k = 0; k < n; ++k) {
    DiagnosticsRecord r;
    r.t = k * dt;
    r.energy = 1.0 - 0.1 * r.t;
    r.dissipation = 0.1;
    r.norm_u_W2q = 1.0 + r.t;
    r.norm_F_W2q = 2.0;
    r.norm_dudt_Lq = 0.5;
    r.norm_dFdt_Lq = 0.25;
    r.norm_gradP_Lq = r.t;
    r.norm_u_W1q = 1.0 + 0.5 * std::sin(r.t);
    r.norm_F_W1q = 1.5;
    r.grad_u_Linf = 1.0;
    r.grad_F_Linf = 0.5;
    r.F_Linf = 2.0;
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("norm_Lq") {
  Grid g = make_grid(2, 8, 1.0, Boundary::Periodic);
  CHECK(norm_Lq(ScalarField(g), 2.0) == 0.0);
  CHECK(norm_Lq(ScalarField(g), kInf) == 0.0);

  ScalarField two(g);
  two.data().setConstant(2.0);
  CHECK(norm_Lq(two, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(norm_Lq(two, 1.0) == doctest::Approx(2.0).epsilon(1e-14));

  ScalarField spike(g);
  spike(0, g.index(3, 5)) = -5.0;
  CHECK(norm_Lq(spike, kInf) == 5.0);

  CHECK_THROWS_AS(norm_Lq(two, 0.5), std::invalid_argument);

  SUBCASE("norm axioms on random fields") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      auto a = test::random_field<MatrixField>(g, rng);
      auto b = test::random_field<MatrixField>(g, rng);
      for (double q : {1.0, 2.0, 6.0, kInf}) {
        const double na = norm_Lq(a, q), nb = norm_Lq(b, q);
        CHECK(norm_Lq(MatrixField(-3.5 * a), q) == doctest::Approx(3.5 * na).epsilon(1e-12));
        CHECK(norm_Lq(MatrixField(a + b), q) <= na + nb + 1e-12);
      }
    }
  }
}

TEST_CASE("W2q proxy") {
  Grid g = make_grid(2, 16, 1.0, Boundary::Periodic);
  CHECK(norm_W2q_proxy(VectorField(g), 6.0) == 0.0);

  ScalarField c(g);
  c.data().setConstant(3.0);
  CHECK(norm_W2q_proxy(c, 2.0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(norm_W2q_proxy(c, 2.0) == norm_W1q_proxy(c, 2.0));

  SUBCASE("second differences vanish on linear data") {
    Grid gd = make_grid(2, 12, 1.0, Boundary::Dirichlet);
    auto lin = field_from_function<ScalarField>(
        gd, [](double x, double y, double, auto& v) { v[0] = 2 * x - 3 * y + 1; }, Parity::Even);
    CHECK(test::max_abs_inner(detail::hessian_magnitude(lin), 1) <= 1e-10);
    auto grad = detail::gradient_magnitude(lin);
    const Index mid = gd.index(6, 6);
    CHECK(grad(0, mid) == doctest::Approx(std::sqrt(13.0)).epsilon(1e-12));
  }

  SUBCASE("sine converges to the analytic value") {
    const double exact = (1 + 2 * kPi + 4 * kPi * kPi) / std::sqrt(2.0);
    double err[3];
    for (int r = 0; r < 3; ++r) {
      Grid gr = make_grid(2, 16 << r, 1.0, Boundary::Periodic);
      auto f = field_from_function<ScalarField>(
          gr, [](double x, double, double, auto& v) { v[0] = std::sin(2 * kPi * x); });
      err[r] = std::abs(norm_W2q_proxy(f, 2.0) - exact);
    }
    CHECK(err[2] < 0.05);
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("energy and dissipation") {
  Grid g = make_grid(2, 8, 2.0, Boundary::Periodic);
  State z = zero_state(g);
  CHECK(energy(z) == 0.0);
  CHECK(dissipation(z) == 0.0);

  State s = zero_state(g);
  for_each_interior(g, [&](Index idx, int, int, int) {
    s.u(0, idx) = 0.3;
    s.u(1, idx) = -1.2;
  });
  enforce_boundary(s.u);
  CHECK(energy(s) == doctest::Approx(0.5 * (0.09 + 1.44) * 4.0).epsilon(1e-14));
  CHECK(dissipation(s) == 0.0);

  SUBCASE("dissipation is the negative Laplacian form") {
    std::mt19937_64 rng(11);
    for (Boundary b : {Boundary::Dirichlet, Boundary::Periodic}) {
      Grid gb = make_grid(2, 10, 1.0, b);
      Grid g3 = make_grid(3, 6, 1.0, b);
      for (const Grid* gg : {&gb, &g3}) {
        State r = random_state(*gg, rng);
        const double form = -dot(laplacian(r.u), r.u) - dot(laplacian(r.F), r.F);
        CHECK(dissipation(r) == doctest::Approx(form).epsilon(1e-12));
        CHECK(dissipation(r) > 0.0);
      }
    }
  }

  SUBCASE("stretching pairs with the gram matrix pointwise") {
    std::mt19937_64 rng(5);
    Grid gd = make_grid(3, 5, 1.0, Boundary::Dirichlet);
    State r = random_state(gd, rng);
    auto lhs = dot(stretch(r.F, r.u), r.F);
    auto rhs = dot(grad_vector(r.u), gram(r.F));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("records") {
  Grid g = make_grid(2, 8, 1.0, Boundary::Periodic);
  HAccumulator H;
  State z = zero_state(g);
  auto r = make_record(z, nullptr, 1, 0.0, {}, H);
  for (double v : record_values(r)) CHECK(v == (v == 1.0 ? 1.0 : 0.0));

  auto values = record_values(ramp_series(3, 0.1)[2]);
  CHECK(values.size() == record_field_names().size());
  CHECK(record_values(record_from_values(values)) == values);
  CHECK_THROWS(record_from_values({1.0, 2.0}));
}

TEST_CASE("H functional") {
  CHECK_THROWS_AS(H_functional({}), Error);
  std::vector<DiagnosticsRecord> zeros(4);
  for (int k = 0; k < 4; ++k) zeros[k].t = 0.1 * k;
  CHECK(H_functional(zeros) == 0.0);

  auto series = ramp_series(20, 0.05);
  HAccumulator acc;
  double prev = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double running = acc.add(series[k]);
    std::vector<DiagnosticsRecord> prefix(series.begin(), series.begin() + k + 1);
    CHECK(running == H_functional(prefix));
    CHECK(running >= prev);
    prev = running;
  }
  // p = 2 integrals of constants over [0, 0.95] plus the sups.
  const double T = 0.95;
  double su = 0;
  for (int k = 1; k < 20; ++k) su += 0.05 * std::pow(1 + 0.05 * k, 2);
  double sp = 0;
  for (int k = 1; k < 20; ++k) sp += 0.05 * std::pow(0.05 * k, 2);
  double sup_u = 0;
  for (int k = 0; k < 20; ++k) sup_u = std::max(sup_u, 1.0 + 0.5 * std::sin(0.05 * k));
  const double expect = std::sqrt(su) + std::sqrt(0.25 * T) + std::sqrt(sp) + std::sqrt(4 * T) +
                        std::sqrt(0.0625 * T) + sup_u + 1.5;
  CHECK(prev == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("energy inequality check") {
  CHECK_THROWS_AS(energy_inequality_check({}, 1.0), Error);
  std::vector<DiagnosticsRecord> zeros(5);
  for (int k = 0; k < 5; ++k) zeros[k].t = k;
  auto rep = energy_inequality_check(zeros, 0.0);
  CHECK(rep.pass);
  for (double m : rep.margins) CHECK(m == 0.0);

  auto series = ramp_series(11, 0.1);
  auto ok = energy_inequality_check(series, 1e-12);
  CHECK(ok.pass);
  CHECK(std::abs(ok.worst) <= 1e-12);

  series[6].energy += 0.01;
  auto bad = energy_inequality_check(series, 1e-3);
  CHECK_FALSE(bad.pass);
  CHECK(bad.worst == doctest::Approx(-0.01).epsilon(1e-9));
}

TEST_CASE("integrability and envelope") {
  CHECK_THROWS_AS(integrability_check({}), Error);
  std::vector<DiagnosticsRecord> zeros(3);
  for (int k = 0; k < 3; ++k) zeros[k].t = k;
  CHECK(integrability_check(zeros) == 0.0);

  auto series = ramp_series(11, 0.1);
  CHECK(gronwall_rate(series[0]) == doctest::Approx(5.5));
  CHECK(gronwall_rate(series[0], 0.0) == doctest::Approx(1.5));
  CHECK(integrability_check(series) == doctest::Approx(5.5).epsilon(1e-12));

  auto env = gronwall_envelope(series, 2.0);
  CHECK(env.envelope.front() == 2.0);
  CHECK(env.envelope.back() == doctest::Approx(2.0 * std::exp(5.5)).epsilon(1e-12));
  for (std::size_t k = 1; k < env.envelope.size(); ++k)
    CHECK(env.envelope[k] >= env.envelope[k - 1]);
}

TEST_CASE("gronwall_compare") {
  Grid g = make_grid(2, 8, 1.0, Boundary::Dirichlet);
  std::mt19937_64 rng(3);
  std::vector<State> states;
  std::vector<DiagnosticsRecord> series;
  HAccumulator H;
  for (int k = 0; k < 6; ++k) {
    State s = random_state(g, rng);
    s.u *= 0.01;
    s.F *= 0.01;
    s.t = 0.01 * k;
    series.push_back(make_record(s, states.empty() ? nullptr : &states.back(), 1, 0, {}, H));
    states.push_back(s);
  }
  GronwallOptions opt;
  opt.dt = 0.01;
  opt.h = g.h[0];
  auto self = gronwall_compare(series, series, states, states, opt);
  CHECK(self.pass);
  for (double x : self.X) CHECK(x == 0.0);

  auto shifted = series;
  shifted[3].t += 1e-3;
  CHECK_THROWS_AS(gronwall_compare(series, shifted, states, states, opt), Error);
  CHECK_THROWS_AS(gronwall_compare(series, series, states, {}, opt), Error);

  auto perturbed = states;
  for (std::size_t k = 3; k < perturbed.size(); ++k) perturbed[k].u(0, g.index(4, 4)) += 0.5;
  auto rep = gronwall_compare(series, series, states, perturbed, opt);
  CHECK_FALSE(rep.pass);
  REQUIRE(rep.first_violation.has_value());
  CHECK(*rep.first_violation == 3);
  CHECK(rep.X[3] > rep.bound[3]);
  CHECK(rep.X[5] > rep.X[4]);
}
