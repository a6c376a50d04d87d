#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gssf/errors.hpp"
#include "gssf/numerics.hpp"
#include "oracles.hpp"

using namespace gssf;

TEST_CASE("matvec identity and annihilation") {
  Vector v(3);
  v << 1, 2, 3;
  CHECK(matvec(Matrix::Identity(3, 3), v) == v);

  Vector u(2);
  u << 5, 7;
  CHECK(matvec(Matrix::Zero(2, 2), u) == Vector::Zero(2));
}

TEST_CASE("matvec matches the scalar-loop oracle") {
  Rng rng(11);
  Matrix m(4, 4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
  const Vector v = rng.uniform_vector(4, -2.0, 2.0);
  const auto expected = oracle::scalar_matvec(oracle::to_grid(m), oracle::to_std(v));
  const Vector got = matvec(m, v);
  for (Index i = 0; i < 4; ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("matvec rejects dimension mismatch") {
  CHECK_THROWS_AS(matvec(Matrix::Zero(2, 3), Vector::Zero(2)), std::invalid_argument);
}

TEST_CASE("matvec is linear") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 1 + rng.uniform_int(1, 8);
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    const Vector u = rng.uniform_vector(n, -1.0, 1.0);
    const Vector v = rng.uniform_vector(n, -1.0, 1.0);
    const double a = rng.uniform(-3.0, 3.0);
    const double b = rng.uniform(-3.0, 3.0);
    const Vector lhs = matvec(m, a * u + b * v);
    const Vector rhs = a * matvec(m, u) + b * matvec(m, v);
    CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
  }
}

TEST_CASE("activation values at reference points") {
  Vector zero(1);
  zero << 0.0;
  CHECK(apply_activation(Activation::Sigmoid, zero)[0] == doctest::Approx(0.5).epsilon(1e-15));

  Vector signs(2);
  signs << -1.0, 2.0;
  const Vector r = apply_activation(Activation::Relu, signs);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 2.0);

  Vector half(1);
  half << 0.5;
  CHECK(apply_activation(Activation::Tanh, half)[0] ==
        doctest::Approx(0.46211715726000974).epsilon(1e-14));
  CHECK(apply_activation(Activation::Identity, half)[0] == 0.5);
}

TEST_CASE("activation derivatives at reference points") {
  Vector zero(1);
  zero << 0.0;
  CHECK(activation_derivative(Activation::Sigmoid, zero)[0] ==
        doctest::Approx(0.25).epsilon(1e-15));

  Vector signs(2);
  signs << -1.0, 2.0;
  const Vector r = activation_derivative(Activation::Relu, signs);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 1.0);
  Vector at_zero(1);
  at_zero << 0.0;
  CHECK(activation_derivative(Activation::Relu, at_zero)[0] == 0.0);

  Vector half(1);
  half << 0.5;
  CHECK(activation_derivative(Activation::Tanh, half)[0] ==
        doctest::Approx(0.7864477329659274).epsilon(1e-14));
}

TEST_CASE("activation derivatives match central finite differences") {
  Rng rng(13);
  const double step = 1e-6;
  for (Activation kind : {Activation::Identity, Activation::Relu, Activation::Tanh,
                          Activation::Sigmoid}) {
    int checked = 0;
    while (checked < 1000) {
      Vector x(1);
      x << rng.uniform(-4.0, 4.0);
      if (kind == Activation::Relu && std::abs(x[0]) < 1e-4) continue;
      const double up = apply_activation(kind, Vector(x.array() + step))[0];
      const double down = apply_activation(kind, Vector(x.array() - step))[0];
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = activation_derivative(kind, x)[0];
      CHECK(std::abs(analytic - numeric) <=
            1e-6 * std::max({1.0, std::abs(analytic), std::abs(numeric)}));
      ++checked;
    }
  }
}

TEST_CASE("spectral radius of diagonal spectra") {
  CHECK(spectral_radius(Matrix::Identity(5, 5)) == doctest::Approx(1.0).epsilon(1e-12));
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 2.0;
  d(1, 1) = 1.0;
  d(2, 2) = 0.5;
  CHECK(spectral_radius(d) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("spectral radius matches the dense eigensolver oracle") {
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = oracle::random_symmetric(6, rng);
    CHECK(spectral_radius(m) == doctest::Approx(oracle::dense_radius(m)).epsilon(1e-8));
  }
}

TEST_CASE("spectral radius scales with |alpha|") {
  Rng rng(15);
  const Matrix m = oracle::random_symmetric(5, rng);
  const double rho = spectral_radius(m);
  for (int trial = 0; trial < 5; ++trial) {
    const double alpha = rng.uniform(-4.0, 4.0);
    CHECK(spectral_radius(alpha * m) ==
          doctest::Approx(std::abs(alpha) * rho).epsilon(1e-9));
  }
}

TEST_CASE("spectral radius of the zero matrix is zero after the restart") {
  CHECK(spectral_radius(Matrix::Zero(4, 4)) == 0.0);
}

TEST_CASE("power iteration reports non-convergence with its last estimate") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 0.99999;
  try {
    power_iteration(d, 1e-16, 3);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_estimate() > 0.9);
    CHECK(e.last_estimate() <= 1.0 + 1e-12);
  }
}

TEST_CASE("power iteration rejects non-square input") {
  CHECK_THROWS_AS(power_iteration(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("rng reproduces its stream and children diverge") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

  Rng c(42);
  Rng child1 = c.child(1), child2 = c.child(2);
  CHECK(child1.uniform() != child2.uniform());
  Rng child1_again = Rng(42).child(1);
  Rng child1_ref = Rng(42).child(1);
  for (int i = 0; i < 10; ++i) CHECK(child1_again.uniform() == child1_ref.uniform());
}

TEST_CASE("activation names round-trip") {
  for (Activation kind : {Activation::Identity, Activation::Relu, Activation::Tanh,
                          Activation::Sigmoid}) {
    CHECK(activation_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(activation_from_string("softplus"), std::invalid_argument);
}
