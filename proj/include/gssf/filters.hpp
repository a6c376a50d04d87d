#pragma once

#include <variant>
#include <vector>

#include "gssf/graph.hpp"
#include "gssf/numerics.hpp"
#include "gssf/types.hpp"

namespace gssf {

enum class FilterKind { Gcnn, Rsn, Lssm };

FilterKind filter_kind_from_string(const std::string& name);
std::string to_string(FilterKind kind);

// Polynomial graph convolution: y = sum_k taps[k] S^k x.
struct GcnnFilterParams {
  Vector taps;  // taps[k], k = 0..K

  int order() const { return static_cast<int>(taps.size()) - 1; }
};

// Recursive shift filter:
//   w_k = sw(h_ww[k] S w_{k-1} + h_wx[k] x)
//   y_k = sy(h_yw[k] w_k + h_yx[k] x)        k = 1..K
//   y_0 = sy(h_yw[0] x + h_yx[0] x),  y = sy(sum_k y_k)
struct RsnFilterParams {
  Vector h_ww, h_wx;  // length K, entry k-1 holds the shift-k weight
  Vector h_yw, h_yx;  // length K+1, entry k holds the shift-k weight

  int order() const { return static_cast<int>(h_ww.size()); }
};

// Gated shift filter. For k = 1..K, with sw = S w_{k-1}:
//   c~_k    = tanh(h_cw[k] sw + h_cx[k] x)
//   gf/gu/gw = sigmoid(h_{f,u,w}w[k] sw + h_{f,u,w}x[k] x)
//   c_k     = gf . c_{k-1} + gu . c~_k        (c_0 = 0)
//   w_k     = gw . tanh(c_k)
//   y_k     = sy(h_yw[k] w_k + h_yx[k] x)
// y_0 = sy(h_yw[0] x + h_yx[0] x), y = sy(sum_k y_k).
// All ten coefficient groups run k = 0..K; only the output pair is used at
// k = 0, so the literal scalar count matches 10(K+1).
struct LssmFilterParams {
  Vector h_cw, h_cx;
  Vector h_fw, h_fx;
  Vector h_uw, h_ux;
  Vector h_ww, h_wx;
  Vector h_yw, h_yx;  // all length K+1

  int order() const { return static_cast<int>(h_cw.size()) - 1; }
};

using FilterParams = std::variant<GcnnFilterParams, RsnFilterParams, LssmFilterParams>;

FilterKind kind_of(const FilterParams& p);
int order_of(const FilterParams& p);

// Scalars held by one filter: K+1 / 4K+2 / 10(K+1).
Index filter_param_size(FilterKind kind, int order);

FilterParams zero_filter_params(FilterKind kind, int order);

// Every scalar drawn uniformly from [-1/sqrt(K+1), 1/sqrt(K+1)].
FilterParams init_filter_params(FilterKind kind, int order, Rng& rng);

// Canonical flat layout (also the gradient layout):
//   gcnn: [taps]
//   rsn:  [h_ww, h_wx, h_yw, h_yx]
//   lssm: [h_cw, h_cx, h_fw, h_fx, h_uw, h_ux, h_ww, h_wx, h_yw, h_yx]
Vector filter_params_flat(const FilterParams& p);
void set_filter_params_flat(FilterParams& p, const Vector& flat);

// Per-shift internals recorded during a forward pass. Gate vectors and
// memories are populated for the LSSM only; indexing is noted per field.
struct FilterTrace {
  std::vector<Vector> w;        // states w_0..w_K
  std::vector<Vector> y_inst;   // instantaneous outputs y_0..y_K
  std::vector<Vector> c;        // LSSM global memory c_0..c_K
  std::vector<Vector> c_tilde;  // LSSM internal memory, k = 1..K
  std::vector<Vector> gate_f, gate_u, gate_w;  // LSSM gates, k = 1..K
  Vector state_norms;           // ||w_k||_2, k = 0..K
};

struct FilterResult {
  Vector y;
  FilterTrace trace;
};

FilterResult gcnn_filter_recursive(const ShiftOperator& s, const GcnnFilterParams& p,
                                   const Vector& x);

// Oracle route via explicit dense matrix powers of Eq-style polynomial form.
Vector gcnn_filter_direct(const ShiftOperator& s, const GcnnFilterParams& p,
                          const Vector& x);

FilterResult rsn_filter(const ShiftOperator& s, const RsnFilterParams& p,
                        const Vector& x, Activation sigma_w, Activation sigma_y);

FilterResult lssm_filter(const ShiftOperator& s, const LssmFilterParams& p,
                         const Vector& x, Activation sigma_y);

// Kind dispatch. sigma_w/sigma_y are ignored where a filter has no such slot.
FilterResult apply_filter(const ShiftOperator& s, const FilterParams& p,
                          const Vector& x, Activation sigma_w, Activation sigma_y);

struct FilterVjp {
  Vector grad_params;  // same layout as filter_params_flat
  Vector grad_x;
};

// Exact reverse-mode gradient of <upstream, y> with respect to the filter
// coefficients and the input, by backpropagation through the unrolled
// shift recursion. The forward pass is recomputed internally.
FilterVjp filter_vjp(const ShiftOperator& s, const FilterParams& p, const Vector& x,
                     Activation sigma_w, Activation sigma_y, const Vector& upstream);

}  // namespace gssf
