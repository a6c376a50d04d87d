#include "gssf/numerics.hpp"

#include <cmath>
#include <stdexcept>

#include "gssf/errors.hpp"

namespace gssf {

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) {
    throw std::invalid_argument("matvec: matrix has " + std::to_string(m.cols()) +
                                " columns but vector has length " +
                                std::to_string(v.size()));
  }
  return m * v;
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw std::invalid_argument("unknown activation: " + name);
}

std::string to_string(Activation kind) {
  switch (kind) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
  }
  throw std::invalid_argument("bad activation enum");
}

namespace {

template <typename Mat>
Mat apply_impl(Activation kind, const Mat& v) {
  switch (kind) {
    case Activation::Identity: return v;
    case Activation::Relu: return relu(v);
    case Activation::Tanh: return v.array().tanh().matrix();
    case Activation::Sigmoid: return sigmoid(v);
  }
  throw std::invalid_argument("bad activation enum");
}

template <typename Mat>
Mat derivative_impl(Activation kind, const Mat& v) {
  switch (kind) {
    case Activation::Identity: return Mat::Ones(v.rows(), v.cols());
    case Activation::Relu:
      return (v.array() > 0.0).template cast<Scalar>().matrix();
    case Activation::Tanh: {
      Mat t = v.array().tanh().matrix();
      return (1.0 - t.array().square()).matrix();
    }
    case Activation::Sigmoid: {
      Mat s = sigmoid(v);
      return (s.array() * (1.0 - s.array())).matrix();
    }
  }
  throw std::invalid_argument("bad activation enum");
}

}  // namespace

Vector apply_activation(Activation kind, const Vector& v) { return apply_impl(kind, v); }
Matrix apply_activation(Activation kind, const Matrix& v) { return apply_impl(kind, v); }
Vector activation_derivative(Activation kind, const Vector& v) { return derivative_impl(kind, v); }
Matrix activation_derivative(Activation kind, const Matrix& v) { return derivative_impl(kind, v); }

PowerIterationResult power_iteration(const Matrix& m, double tol, int max_iters) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("power_iteration: matrix must be square");
  }
  const Index n = m.rows();
  if (n == 0) {
    throw std::invalid_argument("power_iteration: empty matrix");
  }

  Vector v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  double estimate = 0.0;
  bool restarted = false;

  for (int it = 1; it <= max_iters; ++it) {
    Vector w = m * v;
    const double norm = w.norm();
    if (norm < 1e-300) {
      if (!restarted) {
        // Deterministic restart for start vectors annihilated by m.
        restarted = true;
        for (Index i = 0; i < n; ++i) v[i] = std::sin(static_cast<double>(i) + 1.0);
        v.normalize();
        continue;
      }
      return {0.0, v, it};
    }
    const double next = norm;  // Rayleigh estimate of |lambda_max| for unit v
    v = w / norm;
    if (std::abs(next - estimate) < tol) {
      return {next, v, it};
    }
    estimate = next;
  }
  throw ConvergenceError(
      "power_iteration: no convergence after " + std::to_string(max_iters) +
          " iterations (last estimate " + std::to_string(estimate) + ")",
      estimate);
}

double spectral_radius(const Matrix& m, double tol, int max_iters) {
  return power_iteration(m, tol, max_iters).value;
}

}  // namespace gssf
