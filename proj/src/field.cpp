#include "elflow/field.hpp"

namespace elflow {

State zero_state(const Grid& g) {
  State s;
  s.t = 0.0;
  s.u = VectorField(g);
  s.F = MatrixField(g);
  s.P = ScalarField(g);
  return s;
}

}  // namespace elflow
