#pragma once

#include <string>

#include "gssf/types.hpp"

namespace gssf {

// Matrix-vector product with an explicit dimension-contract check.
Vector matvec(const Matrix& m, const Vector& v);

enum class Activation { Identity, Relu, Tanh, Sigmoid };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation kind);

// Expression-friendly element-wise kernels.
template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  return v.cwiseMax(S(0));
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  return (S(1) / (S(1) + (-v.array()).exp())).matrix();
}

// Element-wise activation at the pre-activation values `v`.
Vector apply_activation(Activation kind, const Vector& v);
Matrix apply_activation(Activation kind, const Matrix& v);

// Element-wise derivative at the pre-activation values `v`.
// The relu derivative at exactly 0 is taken as 0.
Vector activation_derivative(Activation kind, const Vector& v);
Matrix activation_derivative(Activation kind, const Matrix& v);

struct PowerIterationResult {
  double value = 0.0;       // largest-magnitude eigenvalue estimate
  Vector vector;            // unit-norm dominant eigenvector estimate
  int iterations = 0;
};

// Power iteration from the normalized all-ones start vector, with one
// deterministic restart if the estimate stalls at zero. Converged when
// successive Rayleigh estimates differ by less than `tol`; throws
// ConvergenceError (carrying the last estimate) after `max_iters`.
PowerIterationResult power_iteration(const Matrix& m, double tol = 1e-12,
                                     int max_iters = 20000);

double spectral_radius(const Matrix& m, double tol = 1e-12,
                       int max_iters = 20000);

}  // namespace gssf
