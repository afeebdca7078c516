// Generated by tools/gen_mms.py; do not edit.
#include <cmath>

#include "elflow/scenario.hpp"

namespace elflow::mms {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void exact(double x, double y, double t, double beta, double* u, double* F, double* p) {
  {
    const double x0 = kPi*x;
    const double x1 = sin(x0);
    const double x2 = kPi*y;
    const double x3 = sin(x2);
    const double x4 = 2*exp(-t);
    u[0] = pow(x1, 2)*x3*x4*cos(x2);
    u[1] = -x1*pow(x3, 2)*x4*cos(x0);
  }
  {
    const double x0 = beta*exp(-t)*sin(kPi*x)*sin(kPi*y);
    const double x1 = (1.0/2.0)*x0;
    F[0] = x0;
    F[1] = x1;
    F[2] = -x1;
    F[3] = x0;
  }
  {
    p[0] = exp(-t)*cos(kPi*x)*cos(kPi*y);
  }
}

void forcing(double x, double y, double t, double beta, double mu, double lambda,
             double gamma, double* f, double* g) {
  {
    const double x0 = exp(-t);
    const double x1 = kPi*x;
    const double x2 = sin(x1);
    const double x3 = kPi*y;
    const double x4 = cos(x3);
    const double x5 = kPi*x4;
    const double x6 = pow(x2, 2);
    const double x7 = sin(x3);
    const double x8 = x4*x7;
    const double x9 = pow(x7, 2);
    const double x10 = cos(x1);
    const double x11 = kPi*x10;
    const double x12 = x11*x9;
    const double x13 = (5.0/2.0)*pow(beta, 2)*lambda*x0;
    const double x14 = pow(x4, 2);
    const double x15 = x12*pow(x2, 3);
    const double x16 = 8*x0;
    const double x17 = pow(x10, 2);
    const double x18 = 4*pow(kPi, 2)*mu;
    const double x19 = 4*x0;
    const double x20 = x10*x2;
    const double x21 = x5*x6;
    const double x22 = x21*pow(x7, 3);
    f[0] = x0*(x12*x13*x2 + x14*x15*x16 - x15*x19*(2*x14 - 1) + x18*x8*(-x17 + 3*x6) - x2*x5 - 2*x6*x8);
    f[1] = x0*(-x11*x7 + x13*x21*x7 + x16*x17*x22 - x18*x20*(-x14 + 3*x9) - x19*x22*(2*x17 - 1) + 2*x20*x9);
  }
  {
    const double x0 = pow(kPi, 2);
    const double x1 = gamma*x0;
    const double x2 = kPi*y;
    const double x3 = sin(x2);
    const double x4 = kPi*x;
    const double x5 = cos(x4);
    const double x6 = exp(-t);
    const double x7 = kPi*x6;
    const double x8 = pow(x3, 2)*x7*(2*pow(x5, 2) - 1);
    const double x9 = cos(x2);
    const double x10 = sin(x4);
    const double x11 = x10*x3;
    const double x12 = x11*x5*x7*x9;
    const double x13 = 4*x12;
    const double x14 = beta*x11*x6;
    const double x15 = pow(x10, 2)*x7*(2*pow(x9, 2) - 1);
    const double x16 = 2*x12;
    const double x17 = x1 - 1.0/2.0;
    g[0] = x14*(2*x1 + x13 - x8 - 1);
    g[1] = x14*(2*x15 - x16 + x17);
    g[2] = x14*(-x16 - x17 - 2*x8);
    g[3] = x14*(2*gamma*x0 - x13 - x15 - 1);
  }
}

}  // namespace elflow::mms
