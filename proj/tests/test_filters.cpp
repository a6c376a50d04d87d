#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gssf/filters.hpp"
#include "gssf/graph.hpp"
#include "oracles.hpp"

using namespace gssf;

namespace {

ShiftOperator random_shift(Index n, Rng& rng, bool normalized = true) {
  Matrix m = oracle::random_symmetric(n, rng);
  if (normalized) {
    Graph g{n, m, std::nullopt, false};
    return normalize_shift(g);
  }
  return make_shift(std::move(m));
}

RsnFilterParams random_rsn(int order, Rng& rng) {
  return std::get<RsnFilterParams>(init_filter_params(FilterKind::Rsn, order, rng));
}

LssmFilterParams random_lssm(int order, Rng& rng) {
  return std::get<LssmFilterParams>(init_filter_params(FilterKind::Lssm, order, rng));
}

GcnnFilterParams random_gcnn(int order, Rng& rng) {
  return std::get<GcnnFilterParams>(init_filter_params(FilterKind::Gcnn, order, rng));
}

}  // namespace

TEST_CASE("identity-tap filter passes the signal through") {
  Rng rng(21);
  const ShiftOperator s = random_shift(5, rng);
  GcnnFilterParams p{Vector::Zero(4)};
  p.taps[0] = 1.0;
  const Vector x = rng.uniform_vector(5, -1.0, 1.0);
  CHECK(gcnn_filter_recursive(s, p, x).y == x);
}

TEST_CASE("zero input gives zero output and zero trace norms") {
  Rng rng(22);
  const ShiftOperator s = random_shift(5, rng);
  const GcnnFilterParams p = random_gcnn(3, rng);
  const FilterResult r = gcnn_filter_recursive(s, p, Vector::Zero(5));
  CHECK(r.y.isZero());
  CHECK(r.trace.state_norms.isZero());
}

TEST_CASE("order-zero filter scales the input") {
  Rng rng(23);
  const ShiftOperator s = random_shift(4, rng);
  GcnnFilterParams p{Vector::Constant(1, -2.5)};
  const Vector x = rng.uniform_vector(4, -1.0, 1.0);
  CHECK(gcnn_filter_direct(s, p, x) == -2.5 * x);
}

TEST_CASE("one-hop tap moves a path-endpoint delta to the middle node") {
  Graph p3;
  p3.n = 3;
  p3.adjacency = Matrix::Zero(3, 3);
  p3.adjacency(0, 1) = p3.adjacency(1, 0) = 1.0;
  p3.adjacency(1, 2) = p3.adjacency(2, 1) = 1.0;
  const ShiftOperator s = make_shift(p3.adjacency);
  GcnnFilterParams taps{Vector::Zero(2)};
  taps.taps[1] = 1.0;
  Vector delta = Vector::Zero(3);
  delta[0] = 1.0;
  Vector expected = Vector::Zero(3);
  expected[1] = 1.0;
  CHECK(gcnn_filter_direct(s, taps, delta) == expected);
}

TEST_CASE("recursive and direct graph convolutions agree") {
  Rng rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = rng.uniform_int(2, 20);
    const int order = static_cast<int>(rng.uniform_int(0, 8));
    const ShiftOperator s = random_shift(n, rng);
    const GcnnFilterParams p = random_gcnn(order, rng);
    const Vector x = rng.uniform_vector(n, -1.0, 1.0);
    const Vector recursive = gcnn_filter_recursive(s, p, x).y;
    const Vector direct = gcnn_filter_direct(s, p, x);
    CHECK((recursive - direct).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("recursive polynomial matches the scalar-loop power oracle") {
  Rng rng(25);
  const Index n = 5;
  const ShiftOperator s = random_shift(n, rng);
  const GcnnFilterParams p = random_gcnn(3, rng);
  const Vector x = rng.uniform_vector(n, -1.0, 1.0);

  const auto grid = oracle::to_grid(s.matrix);
  std::vector<double> shifted = oracle::to_std(x);
  std::vector<double> expected(n, 0.0);
  for (Index i = 0; i < n; ++i) expected[i] = p.taps[0] * shifted[i];
  for (int k = 1; k <= 3; ++k) {
    shifted = oracle::scalar_matvec(grid, shifted);
    for (Index i = 0; i < n; ++i) expected[i] += p.taps[k] * shifted[i];
  }
  const Vector got = gcnn_filter_recursive(s, p, x).y;
  for (Index i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("rsn with identity activations and zero injections is the linear filter") {
  Rng rng(26);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = rng.uniform_int(2, 12);
    const int order = static_cast<int>(rng.uniform_int(1, 6));
    const ShiftOperator s = random_shift(n, rng);
    const GcnnFilterParams taps = random_gcnn(order, rng);
    const Vector x = rng.uniform_vector(n, -1.0, 1.0);

    RsnFilterParams p{Vector::Ones(order), Vector::Zero(order), taps.taps,
                      Vector::Zero(order + 1)};
    const Vector linear = gcnn_filter_recursive(s, taps, x).y;
    const Vector reduced =
        rsn_filter(s, p, x, Activation::Identity, Activation::Identity).y;
    CHECK((linear - reduced).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("all-zero rsn parameters with identity output give zero") {
  Rng rng(27);
  const ShiftOperator s = random_shift(6, rng);
  const auto p = std::get<RsnFilterParams>(zero_filter_params(FilterKind::Rsn, 3));
  const Vector x = rng.uniform_vector(6, -1.0, 1.0);
  CHECK(rsn_filter(s, p, x, Activation::Tanh, Activation::Identity).y.isZero());
}

TEST_CASE("rsn matches its scalar transliteration") {
  Rng rng(28);
  const Index n = 4;
  const int order = 2;
  const ShiftOperator s = random_shift(n, rng);
  const RsnFilterParams p = random_rsn(order, rng);
  const Vector x = rng.uniform_vector(n, -1.0, 1.0);
  const FilterResult got = rsn_filter(s, p, x, Activation::Tanh, Activation::Tanh);
  const auto expected = oracle::rsn_transliteration(
      oracle::to_grid(s.matrix), oracle::to_std(x), order, oracle::to_std(p.h_ww),
      oracle::to_std(p.h_wx), oracle::to_std(p.h_yw), oracle::to_std(p.h_yx), 1, 1);
  for (Index i = 0; i < n; ++i) {
    CHECK(got.y[i] == doctest::Approx(expected[i]).epsilon(1e-13));
  }
}

TEST_CASE("lssm at the sigmoid fixed point") {
  Rng rng(29);
  const ShiftOperator s = random_shift(5, rng);
  const auto p = std::get<LssmFilterParams>(zero_filter_params(FilterKind::Lssm, 3));
  const Vector x = Vector::Zero(5);
  const FilterResult r = lssm_filter(s, p, x, Activation::Identity);
  for (const auto* gates : {&r.trace.gate_f, &r.trace.gate_u, &r.trace.gate_w}) {
    for (const Vector& gate : *gates) {
      CHECK((gate.array() == 0.5).all());
    }
  }
  for (const Vector& ct : r.trace.c_tilde) CHECK(ct.isZero());
  for (const Vector& c : r.trace.c) CHECK(c.isZero());
  for (size_t k = 1; k < r.trace.w.size(); ++k) CHECK(r.trace.w[k].isZero());
  CHECK(r.y.isZero());
}

TEST_CASE("a saturated forget gate freezes the empty memory") {
  Rng rng(30);
  const Index n = 6;
  const int order = 4;
  const ShiftOperator s = random_shift(n, rng);
  auto p = std::get<LssmFilterParams>(init_filter_params(FilterKind::Lssm, order, rng));
  p.h_fw.setZero();
  p.h_fx.setConstant(30.0);  // gf -> 1 for the all-ones input
  p.h_uw.setZero();
  p.h_ux.setConstant(-30.0);  // gu -> 0
  const Vector x = Vector::Ones(n);
  const FilterResult r = lssm_filter(s, p, x, Activation::Tanh);
  for (const Vector& c : r.trace.c) {
    CHECK(c.cwiseAbs().maxCoeff() < 1e-10);  // c_k stays at c_0 = 0
  }
}

TEST_CASE("lssm matches its scalar transliteration") {
  Rng rng(31);
  const Index n = 4;
  const int order = 2;
  const ShiftOperator s = random_shift(n, rng);
  const LssmFilterParams p = random_lssm(order, rng);
  const Vector x = rng.uniform_vector(n, -1.0, 1.0);
  const FilterResult got = lssm_filter(s, p, x, Activation::Tanh);

  oracle::LssmCoeffs h;
  h.cw = oracle::to_std(p.h_cw);
  h.cx = oracle::to_std(p.h_cx);
  h.fw = oracle::to_std(p.h_fw);
  h.fx = oracle::to_std(p.h_fx);
  h.uw = oracle::to_std(p.h_uw);
  h.ux = oracle::to_std(p.h_ux);
  h.ww = oracle::to_std(p.h_ww);
  h.wx = oracle::to_std(p.h_wx);
  h.yw = oracle::to_std(p.h_yw);
  h.yx = oracle::to_std(p.h_yx);
  const auto expected = oracle::lssm_transliteration(oracle::to_grid(s.matrix),
                                                     oracle::to_std(x), order, h, 1);
  for (Index i = 0; i < n; ++i) {
    CHECK(got.y[i] == doctest::Approx(expected[i]).epsilon(1e-13));
  }
}

TEST_CASE("recorded gates lie strictly inside (0,1)") {
  Rng rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = rng.uniform_int(2, 10);
    const int order = static_cast<int>(rng.uniform_int(1, 6));
    const ShiftOperator s = random_shift(n, rng);
    const LssmFilterParams p = random_lssm(order, rng);
    const Vector x = rng.uniform_vector(n, -2.0, 2.0);
    const FilterTrace t = lssm_filter(s, p, x, Activation::Relu).trace;
    for (const auto* gates : {&t.gate_f, &t.gate_u, &t.gate_w}) {
      for (const Vector& gate : *gates) {
        CHECK(gate.minCoeff() > 0.0);
        CHECK(gate.maxCoeff() < 1.0);
      }
    }
  }
}

TEST_CASE("all three filters are permutation equivariant") {
  Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 8;
    const int order = 3;
    const ShiftOperator s = random_shift(n, rng);
    const Vector x = rng.uniform_vector(n, -1.0, 1.0);
    const std::vector<Index> perm = oracle::random_permutation(n, rng);

    Matrix pm = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) pm(perm[i], i) = 1.0;
    ShiftOperator sp;
    sp.matrix = pm * s.matrix * pm.transpose();
    sp.normalization = s.normalization;
    sp.spectral_radius_estimate = s.spectral_radius_estimate;
    const Vector xp = oracle::permute_vector(x, perm);

    const GcnnFilterParams gcnn = random_gcnn(order, rng);
    const RsnFilterParams rsn = random_rsn(order, rng);
    const LssmFilterParams lssm = random_lssm(order, rng);

    const Vector y_gcnn = oracle::permute_vector(gcnn_filter_recursive(s, gcnn, x).y, perm);
    CHECK((gcnn_filter_recursive(sp, gcnn, xp).y - y_gcnn).cwiseAbs().maxCoeff() < 1e-10);

    const Vector y_rsn = oracle::permute_vector(
        rsn_filter(s, rsn, x, Activation::Tanh, Activation::Relu).y, perm);
    CHECK((rsn_filter(sp, rsn, xp, Activation::Tanh, Activation::Relu).y - y_rsn)
              .cwiseAbs()
              .maxCoeff() < 1e-10);

    const Vector y_lssm =
        oracle::permute_vector(lssm_filter(s, lssm, x, Activation::Tanh).y, perm);
    CHECK((lssm_filter(sp, lssm, xp, Activation::Tanh).y - y_lssm).cwiseAbs().maxCoeff() <
          1e-10);
  }
}

TEST_CASE("linear state norms follow the spectrum") {
  Rng rng(34);

  SUBCASE("radius above one explodes at the spectral rate") {
    const ShiftOperator s = make_shift(Matrix(2.0 * Matrix::Identity(4, 4)));
    GcnnFilterParams p{Vector::Zero(31)};
    Vector x = Vector::Zero(4);
    x[0] = 1.0;
    const FilterTrace t = gcnn_filter_recursive(s, p, x).trace;
    const double ratio = t.state_norms[30] / t.state_norms[29];
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.01));
  }

  SUBCASE("non-dominant eigenvector inputs vanish as |lambda|^k") {
    const Graph g = sbm_generate(20, 2, 0.9, 0.2, rng);
    const ShiftOperator s = normalize_shift(g);
    const auto spectrum = oracle::symmetric_spectrum(s.matrix);
    const double lambda2 = std::abs(spectrum.values[1]);
    const Vector x = spectrum.vectors[1];
    GcnnFilterParams p{Vector::Zero(13)};
    const FilterTrace t = gcnn_filter_recursive(s, p, x).trace;
    for (int k = 0; k <= 12; ++k) {
      CHECK(std::abs(t.state_norms[k] - std::pow(lambda2, k)) < 1e-8);
    }
  }
}

TEST_CASE("flat parameter layout round-trips") {
  Rng rng(35);
  for (FilterKind kind : {FilterKind::Gcnn, FilterKind::Rsn, FilterKind::Lssm}) {
    FilterParams p = init_filter_params(kind, 4, rng);
    const Vector flat = filter_params_flat(p);
    CHECK(flat.size() == filter_param_size(kind, 4));
    FilterParams q = zero_filter_params(kind, 4);
    set_filter_params_flat(q, flat);
    CHECK(filter_params_flat(q) == flat);
  }
  CHECK(filter_param_size(FilterKind::Gcnn, 4) == 5);
  CHECK(filter_param_size(FilterKind::Rsn, 4) == 18);
  CHECK(filter_param_size(FilterKind::Lssm, 4) == 50);
}

TEST_CASE("filters reject mismatched dimensions") {
  Rng rng(36);
  const ShiftOperator s = random_shift(4, rng);
  const GcnnFilterParams p = random_gcnn(2, rng);
  CHECK_THROWS_AS(gcnn_filter_recursive(s, p, Vector::Zero(5)), std::invalid_argument);
  CHECK_THROWS_AS(gcnn_filter_direct(s, p, Vector::Zero(3)), std::invalid_argument);
  const RsnFilterParams r = random_rsn(2, rng);
  CHECK_THROWS_AS(rsn_filter(s, r, Vector::Zero(5), Activation::Tanh, Activation::Tanh),
                  std::invalid_argument);
}
