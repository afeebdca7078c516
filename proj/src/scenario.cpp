#include "elflow/scenario.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace elflow {

namespace {

constexpr double kPi = std::numbers::pi;

struct Entry {
  const char* name;
  const char* summary;
  std::set<std::string> declared;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r = {
      {"zero", "zero initial data; every integrator must keep it zero",
       {"dim", "n", "length", "boundary", "mu", "lambda", "gamma", "t_end", "dt",
        "snapshot_every"}},
      {"small_vortex",
       "walled box, stream-function vortex and director bump vanishing to second order at the wall",
       {"n", "length", "amplitude", "mu", "lambda", "gamma", "t_end", "dt", "snapshot_every"}},
      {"near_identity", "periodic box, F = I + epsilon grad w with a Taylor-Green velocity",
       {"n", "length", "amplitude", "epsilon", "mu", "lambda", "gamma", "t_end", "dt",
        "snapshot_every"}},
      {"mms", "manufactured solution on the walled unit square with matching body forces",
       {"n", "amplitude", "mu", "lambda", "gamma", "t_end", "dt", "snapshot_every"}},
  };
  return r;
}

const Entry* find_entry(const std::string& name) {
  for (const auto& e : registry())
    if (name == e.name) return &e;
  return nullptr;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

[[noreturn]] void invalid(const std::string& key, const std::string& value,
                          const std::string& why) {
  throw Error(ErrorKind::InvalidOverride, key + " = " + value + ": " + why);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) invalid(key, v, "not a number");
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) invalid(key, v, "not an integer");
  return out;
}

void apply_override(Scenario& s, const std::string& key, const std::string& v) {
  auto positive = [&](double x) {
    if (!(x > 0.0)) invalid(key, v, "must be positive");
    return x;
  };
  auto nonneg = [&](double x) {
    if (!(x >= 0.0)) invalid(key, v, "must be nonnegative");
    return x;
  };
  if (key == "dim") {
    s.dim = parse_int(key, v);
    if (s.dim != 2 && s.dim != 3) invalid(key, v, "must be 2 or 3");
  } else if (key == "n") {
    s.n = parse_int(key, v);
    if (s.n < 4) invalid(key, v, "must be at least 4");
  } else if (key == "length") {
    s.length = positive(parse_double(key, v));
  } else if (key == "boundary") {
    try {
      s.boundary = boundary_from_string(v);
    } catch (const std::exception&) {
      invalid(key, v, "expected dirichlet or periodic");
    }
  } else if (key == "amplitude") {
    s.amplitude = nonneg(parse_double(key, v));
  } else if (key == "epsilon") {
    s.epsilon = nonneg(parse_double(key, v));
  } else if (key == "mu") {
    s.mu = nonneg(parse_double(key, v));
  } else if (key == "lambda") {
    s.lambda = nonneg(parse_double(key, v));
  } else if (key == "gamma") {
    s.gamma = nonneg(parse_double(key, v));
  } else if (key == "t_end") {
    s.t_end = positive(parse_double(key, v));
  } else if (key == "dt") {
    s.dt = positive(parse_double(key, v));
  } else if (key == "snapshot_every") {
    s.snapshot_every = parse_int(key, v);
    if (s.snapshot_every < 0) invalid(key, v, "must be nonnegative");
  } else {
    invalid(key, v, "unknown parameter");
  }
}

// sin^2(pi x / L): vanishes with its derivative at 0 and L.
double bump(double x, double L, double k = 1.0) {
  const double s = std::sin(k * kPi * x / L);
  return s * s;
}
double bump_dx(double x, double L, double k = 1.0) {
  return k * kPi / L * std::sin(2.0 * k * kPi * x / L);
}

// Components of the director bump d0 and its gradient, unit amplitude.
void vortex_director(double x, double y, double L, double* d, double* F) {
  const double c = L / kPi;
  d[0] = c * bump(x, L) * bump(y, L);
  d[1] = c * bump(x, L, 2.0) * bump(y, L);
  F[0] = c * bump_dx(x, L) * bump(y, L);
  F[1] = c * bump(x, L) * bump_dx(y, L);
  F[2] = c * bump_dx(x, L, 2.0) * bump(y, L);
  F[3] = c * bump(x, L, 2.0) * bump_dx(y, L);
}

// Perturbation w of the identity director and its gradient.
void identity_perturbation(double x, double y, double L, double* w, double* G) {
  const double k = 2.0 * kPi / L, c = 1.0 / k;
  w[0] = c * std::sin(k * x) * std::sin(k * y);
  w[1] = 0.5 * c * std::cos(k * x) * std::sin(2.0 * k * y);
  G[0] = std::cos(k * x) * std::sin(k * y);
  G[1] = std::sin(k * x) * std::cos(k * y);
  G[2] = -0.5 * std::sin(k * x) * std::sin(2.0 * k * y);
  G[3] = std::cos(k * x) * std::cos(2.0 * k * y);
}

VectorField project(const VectorField& u, const LinearSolveConfig& lincfg) {
  LinearSolveConfig c = lincfg;
  c.tol = std::min(c.tol, 1e-12);
  return leray_project(u, c).u;
}

}  // namespace

std::map<std::string, std::string> Scenario::parameters() const {
  return {{"scenario", name},
          {"dim", std::to_string(dim)},
          {"n", std::to_string(n)},
          {"length", format_double(length)},
          {"boundary", to_string(boundary)},
          {"amplitude", format_double(amplitude)},
          {"epsilon", format_double(epsilon)},
          {"mu", format_double(mu)},
          {"lambda", format_double(lambda)},
          {"gamma", format_double(gamma)},
          {"t_end", format_double(t_end)},
          {"dt", format_double(dt)},
          {"snapshot_every", std::to_string(snapshot_every)}};
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : registry()) v.push_back(e.name);
    return v;
  }();
  return names;
}

std::string scenario_summary(const std::string& name) {
  const Entry* e = find_entry(name);
  if (!e) throw Error(ErrorKind::UnknownScenario, name);
  return e->summary;
}

Scenario build_scenario(const std::string& name,
                        const std::map<std::string, std::string>& overrides) {
  const Entry* e = find_entry(name);
  if (!e) throw Error(ErrorKind::UnknownScenario, name);
  Scenario s;
  s.name = name;
  if (name == "zero") {
    s.n = 16;
    s.t_end = 0.1;
    s.dt = 1e-2;
  } else if (name == "small_vortex") {
    s.n = 32;
    s.length = 2.0;
    s.amplitude = 1e-3;
    s.t_end = 0.5;
    s.dt = 1e-3;
  } else if (name == "near_identity") {
    s.n = 16;
    s.boundary = Boundary::Periodic;
    s.amplitude = 0.05;
    s.epsilon = 0.1;
    s.t_end = 0.1;
    s.dt = 1e-3;
  } else if (name == "mms") {
    s.n = 16;
    s.amplitude = 1.0;
    s.t_end = 0.05;
    s.dt = 0.5 / (16.0 * 16.0);
  }
  for (const auto& [key, value] : overrides) {
    if (!e->declared.count(key)) invalid(key, value, "not a parameter of " + name);
    apply_override(s, key, value);
  }
  return s;
}

State initial_state(const Scenario& s, const LinearSolveConfig& lincfg) {
  const Grid g = s.grid();
  State st = zero_state(g);
  const double A = s.amplitude, L = s.length;
  if (s.name == "small_vortex") {
    // psi = A (L / pi) bump(x) bump(y), u = (d psi / dy, -d psi / dx).
    const double c = L / kPi;
    auto u = field_from_function<VectorField>(g, [&](double x, double y, double, auto& v) {
      v[0] = A * c * bump(x, L) * bump_dx(y, L);
      v[1] = -A * c * bump_dx(x, L) * bump(y, L);
    });
    st.u = project(u, lincfg);
    st.F = field_from_function<MatrixField>(g, [&](double x, double y, double, auto& v) {
      double d[2], F[4];
      vortex_director(x, y, L, d, F);
      for (int i = 0; i < 4; ++i) v[i] = A * F[i];
    });
  } else if (s.name == "near_identity") {
    const double k = 2.0 * kPi / L;
    auto u = field_from_function<VectorField>(g, [&](double x, double y, double, auto& v) {
      v[0] = A * std::sin(k * x) * std::cos(k * y);
      v[1] = -A * std::cos(k * x) * std::sin(k * y);
    });
    st.u = project(u, lincfg);
    st.F = field_from_function<MatrixField>(g, [&](double x, double y, double, auto& v) {
      double w[2], G[4];
      identity_perturbation(x, y, L, w, G);
      v[0] = 1.0 + s.epsilon * G[0];
      v[1] = s.epsilon * G[1];
      v[2] = s.epsilon * G[2];
      v[3] = 1.0 + s.epsilon * G[3];
    });
  } else if (s.name == "mms") {
    st = mms_exact_state(s, 0.0);
  }
  return st;
}

DirectorState initial_director_state(const Scenario& s, const LinearSolveConfig& lincfg) {
  const Grid g = s.grid();
  State flow = initial_state(s, lincfg);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(g.dim, g.dim);
  VectorField w(g);
  if (s.name == "small_vortex") {
    w = field_from_function<VectorField>(
        g,
        [&](double x, double y, double, auto& v) {
          double d[2], F[4];
          vortex_director(x, y, s.length, d, F);
          v[0] = s.amplitude * d[0];
          v[1] = s.amplitude * d[1];
        },
        Parity::Even);
  } else if (s.name == "near_identity") {
    A.setIdentity();
    w = field_from_function<VectorField>(g, [&](double x, double y, double, auto& v) {
      double ww[2], G[4];
      identity_perturbation(x, y, s.length, ww, G);
      v[0] = s.epsilon * ww[0];
      v[1] = s.epsilon * ww[1];
    });
  } else if (s.name != "zero") {
    throw std::invalid_argument("scenario " + s.name + " has no director form");
  }
  return make_director_state(flow, w, A);
}

PicardConfig picard_config(const Scenario& s) {
  PicardConfig c;
  c.dt = s.dt;
  c.mu = s.mu;
  c.lambda = s.lambda;
  c.gamma = s.gamma;
  if (s.name == "mms") {
    const Grid g = s.grid();
    const double beta = s.amplitude, mu = s.mu, lambda = s.lambda, gamma = s.gamma;
    c.source = [g, beta, mu, lambda, gamma](double t, VectorField& f, MatrixField& G) {
      for_each_interior(g, [&](Index idx, int i, int j, int) {
        double fv[2], gv[4];
        mms::forcing(g.center(0, i), g.center(1, j), t, beta, mu, lambda, gamma, fv, gv);
        for (int a = 0; a < 2; ++a) f(a, idx) += fv[a];
        for (int a = 0; a < 4; ++a) G(a, idx) += gv[a];
      });
      enforce_boundary(f);
      enforce_boundary(G);
    };
  }
  return c;
}

WeakConfig weak_config(const Scenario& s) {
  if (s.name == "mms") throw std::invalid_argument("the weak integrator takes no body forces");
  WeakConfig c;
  c.dt = s.dt;
  c.mu = s.mu;
  c.lambda = s.lambda;
  c.gamma = s.gamma;
  return c;
}

State mms_exact_state(const Scenario& s, double t) {
  const Grid g = s.grid();
  State st = zero_state(g);
  st.t = t;
  for_each_interior(g, [&](Index idx, int i, int j, int) {
    double u[2], F[4], p;
    mms::exact(g.center(0, i), g.center(1, j), t, s.amplitude, u, F, &p);
    for (int a = 0; a < 2; ++a) st.u(a, idx) = u[a];
    for (int a = 0; a < 4; ++a) st.F(a, idx) = F[a];
    st.P(0, idx) = p;
  });
  const double mean = interior_mean(st.P);
  st.P.data() -= mean;
  enforce_boundary(st.u);
  enforce_boundary(st.F);
  enforce_boundary(st.P);
  return st;
}

}  // namespace elflow
