#include "doctest.h"

#include "elflow/field.hpp"
#include "test_support.hpp"

using namespace elflow;

TEST_CASE("make_grid computes spacings and validates input") {
  Grid g = make_grid(2, {8, 8, 1}, {1.0, 1.0, 1.0}, Boundary::Periodic);
  CHECK(g.h[0] == 0.125);
  CHECK(g.h[1] == 0.125);
  CHECK(g.cells() == 64);

  Grid g3 = make_grid(3, {4, 4, 4}, {1.0, 1.0, 1.0}, Boundary::Dirichlet);
  CHECK(g3.cells() == 64);
  CHECK(g3.padded_cells() == 216);

  CHECK_THROWS_AS(make_grid(2, {2, 2, 1}, {1.0, 1.0, 1.0}, Boundary::Dirichlet), GridError);
  CHECK_THROWS_AS(make_grid(1, {8, 8, 8}, {1.0, 1.0, 1.0}, Boundary::Dirichlet), GridError);
  CHECK_THROWS_AS(make_grid(4, {8, 8, 8}, {1.0, 1.0, 1.0}, Boundary::Dirichlet), GridError);
  CHECK_THROWS_AS(make_grid(2, {8, 8, 1}, {1.0, 0.0, 1.0}, Boundary::Periodic), GridError);
}

TEST_CASE("zero_state has zero fields and zero-mean pressure") {
  for (Grid g : {make_grid(2, 8, 1.0, Boundary::Periodic), make_grid(3, 4, 1.0, Boundary::Dirichlet)}) {
    State s = zero_state(g);
    CHECK(max_abs(s.u) == 0.0);
    CHECK(max_abs(s.F) == 0.0);
    CHECK(interior_mean(s.P) == 0.0);
    CHECK(s.u.components() == g.dim);
    CHECK(s.F.components() == g.dim * g.dim);
  }
}

TEST_CASE("enforce_boundary: Dirichlet ghost reflects with a sign flip") {
  Grid g = make_grid(2, 6, 1.0, Boundary::Dirichlet);
  VectorField u(g);
  for_each_interior(g, [&](Index idx, int, int, int) { u(0, idx) = u(1, idx) = 1.0; });
  enforce_boundary(u);
  for (int j = 0; j < g.n[1]; ++j) {
    CHECK(u(0, g.index(-1, j)) == -1.0);
    CHECK(u(1, g.index(g.n[0], j)) == -1.0);
  }
  for (int i = 0; i < g.n[0]; ++i) {
    CHECK(u(0, g.index(i, -1)) == -1.0);
    CHECK(u(0, g.index(i, g.n[1])) == -1.0);
  }
  // Corner ghosts reflect twice.
  CHECK(u(0, g.index(-1, -1)) == 1.0);

  ScalarField p(g);
  for_each_interior(g, [&](Index idx, int, int, int) { p(0, idx) = 2.0; });
  enforce_boundary(p);
  CHECK(p(0, g.index(-1, 3)) == 2.0);
}

TEST_CASE("enforce_boundary: periodic ghost copies the opposite side") {
  std::mt19937_64 rng(7);
  Grid g = make_grid(3, {5, 6, 4}, {1.0, 2.0, 1.0}, Boundary::Periodic);
  auto f = test::random_field<MatrixField>(g, rng);
  for (int j = 0; j < g.n[1]; ++j)
    for (int k = 0; k < g.n[2]; ++k) {
      CHECK(f(3, g.index(-1, j, k)) == f(3, g.index(g.n[0] - 1, j, k)));
      CHECK(f(3, g.index(g.n[0], j, k)) == f(3, g.index(0, j, k)));
    }
  CHECK(f(0, g.index(-1, -1, -1)) == f(0, g.index(4, 5, 3)));
}

TEST_CASE("enforce_boundary is idempotent and leaves zero fields unchanged") {
  std::mt19937_64 rng(11);
  for (Boundary b : {Boundary::Dirichlet, Boundary::Periodic}) {
    Grid g = make_grid(3, {4, 5, 6}, {1.0, 1.0, 1.0}, b);
    auto f = test::random_field<VectorField>(g, rng);
    VectorField once = f;
    enforce_boundary(f);
    CHECK(f.bitwise_equal(once));
    VectorField z(g);
    enforce_boundary(z);
    CHECK(max_abs(z) == 0.0);
  }
}

TEST_CASE("field arithmetic rejects grid mismatch") {
  VectorField a(make_grid(2, 8, 1.0, Boundary::Periodic));
  VectorField b(make_grid(2, 8, 2.0, Boundary::Periodic));
  CHECK_THROWS_AS(a += b, FieldError);
}
