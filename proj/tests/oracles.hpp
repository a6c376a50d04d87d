// Test-only reference implementations, written independently of the library
// kernels: plain scalar loops over std::vector<double>. Used to cross-check
// the Eigen-based code paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gssf/graph.hpp"
#include "gssf/types.hpp"

namespace oracle {

using Grid = std::vector<std::vector<double>>;  // row-major dense matrix

inline Grid to_grid(const gssf::Matrix& m) {
  Grid g(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) g[i][j] = m(i, j);
  return g;
}

inline std::vector<double> to_std(const gssf::Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline gssf::Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const gssf::Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> scalar_matvec(const Grid& m, const std::vector<double>& v) {
  std::vector<double> out(m.size(), 0.0);
  for (size_t i = 0; i < m.size(); ++i) {
    double acc = 0.0;
    for (size_t j = 0; j < v.size(); ++j) acc += m[i][j] * v[j];
    out[i] = acc;
  }
  return out;
}

inline double scalar_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Largest-magnitude eigenvalue via a dense QR-iteration solver.
inline double dense_radius(const gssf::Matrix& m) {
  Eigen::EigenSolver<gssf::Matrix> solver(m);
  double best = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    best = std::max(best, std::abs(solver.eigenvalues()[i]));
  }
  return best;
}

// Eigen-decomposition of a symmetric matrix, sorted by |eigenvalue| descending.
struct SymmetricSpectrum {
  std::vector<double> values;
  std::vector<gssf::Vector> vectors;
};

inline SymmetricSpectrum symmetric_spectrum(const gssf::Matrix& m) {
  Eigen::SelfAdjointEigenSolver<gssf::Matrix> solver(m);
  std::vector<Eigen::Index> order(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(solver.eigenvalues()[a]) > std::abs(solver.eigenvalues()[b]);
  });
  SymmetricSpectrum out;
  for (Eigen::Index i : order) {
    out.values.push_back(solver.eigenvalues()[i]);
    out.vectors.push_back(solver.eigenvectors().col(i));
  }
  return out;
}

// Straight-line scalar transcription of the RSN recursion:
//   w_k = sw(h_ww[k] * (S w_{k-1}) + h_wx[k] * x)
//   y_k = sy(h_yw[k] * w_k + h_yx[k] * x), y = sy(sum_k y_k), w_0 = x.
// Activation codes: 0 identity, 1 tanh, 2 sigmoid, 3 relu.
inline double scalar_act(int code, double v) {
  switch (code) {
    case 1: return std::tanh(v);
    case 2: return scalar_sigmoid(v);
    case 3: return v > 0.0 ? v : 0.0;
    default: return v;
  }
}

inline std::vector<double> rsn_transliteration(
    const Grid& s, const std::vector<double>& x, int order,
    const std::vector<double>& h_ww, const std::vector<double>& h_wx,
    const std::vector<double>& h_yw, const std::vector<double>& h_yx, int act_w,
    int act_y) {
  const size_t n = x.size();
  std::vector<double> w = x;
  std::vector<double> acc(n);
  for (size_t i = 0; i < n; ++i) acc[i] = scalar_act(act_y, h_yw[0] * w[i] + h_yx[0] * x[i]);
  for (int k = 1; k <= order; ++k) {
    const std::vector<double> sw = scalar_matvec(s, w);
    for (size_t i = 0; i < n; ++i) {
      w[i] = scalar_act(act_w, h_ww[k - 1] * sw[i] + h_wx[k - 1] * x[i]);
    }
    for (size_t i = 0; i < n; ++i) {
      acc[i] += scalar_act(act_y, h_yw[k] * w[i] + h_yx[k] * x[i]);
    }
  }
  for (size_t i = 0; i < n; ++i) acc[i] = scalar_act(act_y, acc[i]);
  return acc;
}

struct LssmCoeffs {
  // all indexed 0..K; shift-k recursion entries used for k >= 1
  std::vector<double> cw, cx, fw, fx, uw, ux, ww, wx, yw, yx;
};

// Scalar transcription of the gated recursion: internal memory, three
// sigmoid gates, global memory, state, instantaneous and overall outputs.
inline std::vector<double> lssm_transliteration(const Grid& s,
                                                const std::vector<double>& x, int order,
                                                const LssmCoeffs& h, int act_y) {
  const size_t n = x.size();
  std::vector<double> w = x;
  std::vector<double> c(n, 0.0);
  std::vector<double> acc(n);
  for (size_t i = 0; i < n; ++i) acc[i] = scalar_act(act_y, h.yw[0] * w[i] + h.yx[0] * x[i]);
  for (int k = 1; k <= order; ++k) {
    const std::vector<double> sw = scalar_matvec(s, w);
    for (size_t i = 0; i < n; ++i) {
      const double ct = std::tanh(h.cw[k] * sw[i] + h.cx[k] * x[i]);
      const double gf = scalar_sigmoid(h.fw[k] * sw[i] + h.fx[k] * x[i]);
      const double gu = scalar_sigmoid(h.uw[k] * sw[i] + h.ux[k] * x[i]);
      const double gw = scalar_sigmoid(h.ww[k] * sw[i] + h.wx[k] * x[i]);
      c[i] = gf * c[i] + gu * ct;
      w[i] = gw * std::tanh(c[i]);
    }
    for (size_t i = 0; i < n; ++i) {
      acc[i] += scalar_act(act_y, h.yw[k] * w[i] + h.yx[k] * x[i]);
    }
  }
  for (size_t i = 0; i < n; ++i) acc[i] = scalar_act(act_y, acc[i]);
  return acc;
}

// Random symmetric matrix with entries in [-1, 1].
inline gssf::Matrix random_symmetric(gssf::Index n, gssf::Rng& rng) {
  gssf::Matrix m(n, n);
  for (gssf::Index i = 0; i < n; ++i) {
    for (gssf::Index j = i; j < n; ++j) m(i, j) = m(j, i) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

inline std::vector<gssf::Index> random_permutation(gssf::Index n, gssf::Rng& rng) {
  std::vector<gssf::Index> perm(n);
  for (gssf::Index i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng.engine());
  return perm;
}

inline gssf::Vector permute_vector(const gssf::Vector& x,
                                   const std::vector<gssf::Index>& perm) {
  gssf::Vector out(x.size());
  for (gssf::Index i = 0; i < x.size(); ++i) out[perm[i]] = x[i];
  return out;
}

}  // namespace oracle
