#include "gssf/filters.hpp"

#include <cmath>
#include <stdexcept>

namespace gssf {

FilterKind filter_kind_from_string(const std::string& name) {
  if (name == "gcnn") return FilterKind::Gcnn;
  if (name == "rsn") return FilterKind::Rsn;
  if (name == "lssm") return FilterKind::Lssm;
  throw std::invalid_argument("unknown filter kind: " + name);
}

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::Gcnn: return "gcnn";
    case FilterKind::Rsn: return "rsn";
    case FilterKind::Lssm: return "lssm";
  }
  throw std::invalid_argument("bad filter kind enum");
}

FilterKind kind_of(const FilterParams& p) {
  return static_cast<FilterKind>(p.index());
}

int order_of(const FilterParams& p) {
  return std::visit([](const auto& v) { return v.order(); }, p);
}

Index filter_param_size(FilterKind kind, int order) {
  switch (kind) {
    case FilterKind::Gcnn: return order + 1;
    case FilterKind::Rsn: return 4 * order + 2;
    case FilterKind::Lssm: return 10 * (order + 1);
  }
  throw std::invalid_argument("bad filter kind enum");
}

FilterParams zero_filter_params(FilterKind kind, int order) {
  if (order < 0 || (kind != FilterKind::Gcnn && order < 1)) {
    throw std::invalid_argument("filter order must be >= 0 (>= 1 for rsn/lssm)");
  }
  switch (kind) {
    case FilterKind::Gcnn:
      return GcnnFilterParams{Vector::Zero(order + 1)};
    case FilterKind::Rsn:
      return RsnFilterParams{Vector::Zero(order), Vector::Zero(order),
                             Vector::Zero(order + 1), Vector::Zero(order + 1)};
    case FilterKind::Lssm: {
      LssmFilterParams p;
      for (Vector* v : {&p.h_cw, &p.h_cx, &p.h_fw, &p.h_fx, &p.h_uw, &p.h_ux,
                        &p.h_ww, &p.h_wx, &p.h_yw, &p.h_yx}) {
        *v = Vector::Zero(order + 1);
      }
      return p;
    }
  }
  throw std::invalid_argument("bad filter kind enum");
}

FilterParams init_filter_params(FilterKind kind, int order, Rng& rng) {
  FilterParams p = zero_filter_params(kind, order);
  const double bound = 1.0 / std::sqrt(static_cast<double>(order + 1));
  Vector flat = rng.uniform_vector(filter_param_size(kind, order), -bound, bound);
  set_filter_params_flat(p, flat);
  return p;
}

namespace {

std::vector<const Vector*> param_groups(const FilterParams& p) {
  if (const auto* g = std::get_if<GcnnFilterParams>(&p)) {
    return {&g->taps};
  }
  if (const auto* r = std::get_if<RsnFilterParams>(&p)) {
    return {&r->h_ww, &r->h_wx, &r->h_yw, &r->h_yx};
  }
  const auto& l = std::get<LssmFilterParams>(p);
  return {&l.h_cw, &l.h_cx, &l.h_fw, &l.h_fx, &l.h_uw,
          &l.h_ux, &l.h_ww, &l.h_wx, &l.h_yw, &l.h_yx};
}

std::vector<Vector*> param_groups(FilterParams& p) {
  std::vector<Vector*> out;
  for (const Vector* v : param_groups(static_cast<const FilterParams&>(p))) {
    out.push_back(const_cast<Vector*>(v));
  }
  return out;
}

}  // namespace

Vector filter_params_flat(const FilterParams& p) {
  Vector flat(filter_param_size(kind_of(p), order_of(p)));
  Index at = 0;
  for (const Vector* v : param_groups(p)) {
    flat.segment(at, v->size()) = *v;
    at += v->size();
  }
  return flat;
}

void set_filter_params_flat(FilterParams& p, const Vector& flat) {
  if (flat.size() != filter_param_size(kind_of(p), order_of(p))) {
    throw std::invalid_argument("set_filter_params_flat: length mismatch");
  }
  Index at = 0;
  for (Vector* v : param_groups(p)) {
    *v = flat.segment(at, v->size());
    at += v->size();
  }
}

namespace {

void check_dims(const ShiftOperator& s, const Vector& x, const char* where) {
  if (s.matrix.rows() != s.matrix.cols()) {
    throw std::invalid_argument(std::string(where) + ": shift operator must be square");
  }
  if (s.matrix.cols() != x.size()) {
    throw std::invalid_argument(std::string(where) + ": signal length " +
                                std::to_string(x.size()) + " does not match shift size " +
                                std::to_string(s.matrix.rows()));
  }
}

void record_norms(FilterTrace& t) {
  t.state_norms.resize(static_cast<Index>(t.w.size()));
  for (size_t k = 0; k < t.w.size(); ++k) {
    t.state_norms[static_cast<Index>(k)] = t.w[k].norm();
  }
}

}  // namespace

FilterResult gcnn_filter_recursive(const ShiftOperator& s, const GcnnFilterParams& p,
                                   const Vector& x) {
  check_dims(s, x, "gcnn_filter_recursive");
  const int K = p.order();
  FilterResult r;
  r.trace.w.reserve(K + 1);
  r.trace.y_inst.reserve(K + 1);

  Vector w = x;
  r.trace.w.push_back(w);
  Vector yk = p.taps[0] * w;
  r.trace.y_inst.push_back(yk);
  r.y = yk;
  for (int k = 1; k <= K; ++k) {
    w = s.matrix * w;
    yk = p.taps[k] * w;
    r.trace.w.push_back(w);
    r.trace.y_inst.push_back(yk);
    r.y += yk;
  }
  record_norms(r.trace);
  return r;
}

Vector gcnn_filter_direct(const ShiftOperator& s, const GcnnFilterParams& p,
                          const Vector& x) {
  check_dims(s, x, "gcnn_filter_direct");
  const Index n = s.matrix.rows();
  Matrix power = Matrix::Identity(n, n);
  Matrix filter = p.taps[0] * power;
  for (int k = 1; k <= p.order(); ++k) {
    power = s.matrix * power;
    filter += p.taps[k] * power;
  }
  return filter * x;
}

FilterResult rsn_filter(const ShiftOperator& s, const RsnFilterParams& p,
                        const Vector& x, Activation sigma_w, Activation sigma_y) {
  check_dims(s, x, "rsn_filter");
  const int K = p.order();
  FilterResult r;
  r.trace.w.reserve(K + 1);
  r.trace.y_inst.reserve(K + 1);

  Vector w = x;
  r.trace.w.push_back(w);
  Vector yk = apply_activation(sigma_y, Vector(p.h_yw[0] * w + p.h_yx[0] * x));
  r.trace.y_inst.push_back(yk);
  Vector acc = yk;
  for (int k = 1; k <= K; ++k) {
    w = apply_activation(sigma_w, Vector(p.h_ww[k - 1] * (s.matrix * w) + p.h_wx[k - 1] * x));
    yk = apply_activation(sigma_y, Vector(p.h_yw[k] * w + p.h_yx[k] * x));
    r.trace.w.push_back(w);
    r.trace.y_inst.push_back(yk);
    acc += yk;
  }
  r.y = apply_activation(sigma_y, acc);
  record_norms(r.trace);
  return r;
}

FilterResult lssm_filter(const ShiftOperator& s, const LssmFilterParams& p,
                         const Vector& x, Activation sigma_y) {
  check_dims(s, x, "lssm_filter");
  const int K = p.order();
  const Index n = x.size();
  FilterResult r;
  FilterTrace& t = r.trace;
  t.w.reserve(K + 1);
  t.y_inst.reserve(K + 1);
  t.c.reserve(K + 1);

  Vector w = x;
  Vector c = Vector::Zero(n);
  t.w.push_back(w);
  t.c.push_back(c);
  Vector yk = apply_activation(sigma_y, Vector(p.h_yw[0] * w + p.h_yx[0] * x));
  t.y_inst.push_back(yk);
  Vector acc = yk;

  for (int k = 1; k <= K; ++k) {
    const Vector sw = s.matrix * w;
    Vector ct = (p.h_cw[k] * sw + p.h_cx[k] * x).array().tanh().matrix();
    Vector gf = sigmoid(Vector(p.h_fw[k] * sw + p.h_fx[k] * x));
    Vector gu = sigmoid(Vector(p.h_uw[k] * sw + p.h_ux[k] * x));
    Vector gw = sigmoid(Vector(p.h_ww[k] * sw + p.h_wx[k] * x));
    c = (gf.array() * c.array() + gu.array() * ct.array()).matrix();
    w = (gw.array() * c.array().tanh()).matrix();
    yk = apply_activation(sigma_y, Vector(p.h_yw[k] * w + p.h_yx[k] * x));
    acc += yk;

    t.c_tilde.push_back(std::move(ct));
    t.gate_f.push_back(std::move(gf));
    t.gate_u.push_back(std::move(gu));
    t.gate_w.push_back(std::move(gw));
    t.c.push_back(c);
    t.w.push_back(w);
    t.y_inst.push_back(yk);
  }
  r.y = apply_activation(sigma_y, acc);
  record_norms(t);
  return r;
}

FilterResult apply_filter(const ShiftOperator& s, const FilterParams& p,
                          const Vector& x, Activation sigma_w, Activation sigma_y) {
  if (const auto* g = std::get_if<GcnnFilterParams>(&p)) {
    return gcnn_filter_recursive(s, *g, x);
  }
  if (const auto* r = std::get_if<RsnFilterParams>(&p)) {
    return rsn_filter(s, *r, x, sigma_w, sigma_y);
  }
  return lssm_filter(s, std::get<LssmFilterParams>(p), x, sigma_y);
}

namespace {

FilterVjp gcnn_vjp(const ShiftOperator& s, const GcnnFilterParams& p,
                   const Vector& x, const Vector& upstream) {
  const int K = p.order();
  std::vector<Vector> w(K + 1);
  w[0] = x;
  for (int k = 1; k <= K; ++k) w[k] = s.matrix * w[k - 1];

  FilterVjp out;
  out.grad_params.resize(K + 1);
  for (int k = 0; k <= K; ++k) out.grad_params[k] = upstream.dot(w[k]);

  Vector wbar = p.taps[K] * upstream;
  for (int k = K - 1; k >= 0; --k) {
    wbar = p.taps[k] * upstream + s.matrix.transpose() * wbar;
  }
  out.grad_x = wbar;
  return out;
}

FilterVjp rsn_vjp(const ShiftOperator& s, const RsnFilterParams& p, const Vector& x,
                  Activation sigma_w, Activation sigma_y, const Vector& upstream) {
  const int K = p.order();
  const Index n = x.size();

  // Forward, keeping states, diffused states and pre-activations.
  std::vector<Vector> w(K + 1), sw(K + 1), pre_w(K + 1), pre_y(K + 1);
  w[0] = x;
  pre_y[0] = p.h_yw[0] * w[0] + p.h_yx[0] * x;
  Vector acc = apply_activation(sigma_y, pre_y[0]);
  for (int k = 1; k <= K; ++k) {
    sw[k] = s.matrix * w[k - 1];
    pre_w[k] = p.h_ww[k - 1] * sw[k] + p.h_wx[k - 1] * x;
    w[k] = apply_activation(sigma_w, pre_w[k]);
    pre_y[k] = p.h_yw[k] * w[k] + p.h_yx[k] * x;
    acc += apply_activation(sigma_y, pre_y[k]);
  }

  FilterVjp out;
  Vector g_ww = Vector::Zero(K), g_wx = Vector::Zero(K);
  Vector g_yw = Vector::Zero(K + 1), g_yx = Vector::Zero(K + 1);
  out.grad_x = Vector::Zero(n);

  const Vector ubar =
      (activation_derivative(sigma_y, acc).array() * upstream.array()).matrix();

  Vector wbar = Vector::Zero(n);
  for (int k = K; k >= 1; --k) {
    const Vector pybar =
        (activation_derivative(sigma_y, pre_y[k]).array() * ubar.array()).matrix();
    g_yw[k] = pybar.dot(w[k]);
    g_yx[k] = pybar.dot(x);
    out.grad_x += p.h_yx[k] * pybar;
    wbar += p.h_yw[k] * pybar;

    const Vector pwbar =
        (activation_derivative(sigma_w, pre_w[k]).array() * wbar.array()).matrix();
    g_ww[k - 1] = pwbar.dot(sw[k]);
    g_wx[k - 1] = pwbar.dot(x);
    out.grad_x += p.h_wx[k - 1] * pwbar;
    wbar = p.h_ww[k - 1] * (s.matrix.transpose() * pwbar);
  }
  const Vector pybar0 =
      (activation_derivative(sigma_y, pre_y[0]).array() * ubar.array()).matrix();
  g_yw[0] = pybar0.dot(w[0]);
  g_yx[0] = pybar0.dot(x);
  out.grad_x += p.h_yx[0] * pybar0;
  wbar += p.h_yw[0] * pybar0;
  out.grad_x += wbar;  // w_0 = x

  out.grad_params.resize(4 * K + 2);
  out.grad_params << g_ww, g_wx, g_yw, g_yx;
  return out;
}

FilterVjp lssm_vjp(const ShiftOperator& s, const LssmFilterParams& p, const Vector& x,
                   Activation sigma_y, const Vector& upstream) {
  const int K = p.order();
  const Index n = x.size();

  // Forward, keeping everything the backward sweep touches.
  std::vector<Vector> w(K + 1), sw(K + 1), c(K + 1), tc(K + 1), ct(K + 1);
  std::vector<Vector> gf(K + 1), gu(K + 1), gw(K + 1), pre_y(K + 1);
  w[0] = x;
  c[0] = Vector::Zero(n);
  pre_y[0] = p.h_yw[0] * w[0] + p.h_yx[0] * x;
  Vector acc = apply_activation(sigma_y, pre_y[0]);
  for (int k = 1; k <= K; ++k) {
    sw[k] = s.matrix * w[k - 1];
    ct[k] = (p.h_cw[k] * sw[k] + p.h_cx[k] * x).array().tanh().matrix();
    gf[k] = sigmoid(Vector(p.h_fw[k] * sw[k] + p.h_fx[k] * x));
    gu[k] = sigmoid(Vector(p.h_uw[k] * sw[k] + p.h_ux[k] * x));
    gw[k] = sigmoid(Vector(p.h_ww[k] * sw[k] + p.h_wx[k] * x));
    c[k] = (gf[k].array() * c[k - 1].array() + gu[k].array() * ct[k].array()).matrix();
    tc[k] = c[k].array().tanh().matrix();
    w[k] = (gw[k].array() * tc[k].array()).matrix();
    pre_y[k] = p.h_yw[k] * w[k] + p.h_yx[k] * x;
    acc += apply_activation(sigma_y, pre_y[k]);
  }

  Vector g_cw = Vector::Zero(K + 1), g_cx = Vector::Zero(K + 1);
  Vector g_fw = Vector::Zero(K + 1), g_fx = Vector::Zero(K + 1);
  Vector g_uw = Vector::Zero(K + 1), g_ux = Vector::Zero(K + 1);
  Vector g_ww = Vector::Zero(K + 1), g_wx = Vector::Zero(K + 1);
  Vector g_yw = Vector::Zero(K + 1), g_yx = Vector::Zero(K + 1);

  FilterVjp out;
  out.grad_x = Vector::Zero(n);

  const Vector ubar =
      (activation_derivative(sigma_y, acc).array() * upstream.array()).matrix();

  Vector wbar = Vector::Zero(n);
  Vector cbar = Vector::Zero(n);
  for (int k = K; k >= 1; --k) {
    const Vector pybar =
        (activation_derivative(sigma_y, pre_y[k]).array() * ubar.array()).matrix();
    g_yw[k] = pybar.dot(w[k]);
    g_yx[k] = pybar.dot(x);
    out.grad_x += p.h_yx[k] * pybar;
    wbar += p.h_yw[k] * pybar;

    // w_k = gw . tanh(c_k)
    const Vector gwbar = (wbar.array() * tc[k].array()).matrix();
    cbar += (wbar.array() * gw[k].array() * (1.0 - tc[k].array().square())).matrix();

    // c_k = gf . c_{k-1} + gu . c~_k
    const Vector gfbar = (cbar.array() * c[k - 1].array()).matrix();
    const Vector gubar = (cbar.array() * ct[k].array()).matrix();
    const Vector ctbar = (cbar.array() * gu[k].array()).matrix();
    const Vector cbar_prev = (cbar.array() * gf[k].array()).matrix();

    // back through tanh / the three sigmoids to the pre-activations
    const Vector pcbar = (ctbar.array() * (1.0 - ct[k].array().square())).matrix();
    const Vector pfbar = (gfbar.array() * gf[k].array() * (1.0 - gf[k].array())).matrix();
    const Vector pubar = (gubar.array() * gu[k].array() * (1.0 - gu[k].array())).matrix();
    const Vector pwbar = (gwbar.array() * gw[k].array() * (1.0 - gw[k].array())).matrix();

    g_cw[k] = pcbar.dot(sw[k]);
    g_cx[k] = pcbar.dot(x);
    g_fw[k] = pfbar.dot(sw[k]);
    g_fx[k] = pfbar.dot(x);
    g_uw[k] = pubar.dot(sw[k]);
    g_ux[k] = pubar.dot(x);
    g_ww[k] = pwbar.dot(sw[k]);
    g_wx[k] = pwbar.dot(x);
    out.grad_x += p.h_cx[k] * pcbar + p.h_fx[k] * pfbar + p.h_ux[k] * pubar +
                  p.h_wx[k] * pwbar;

    wbar = s.matrix.transpose() *
           Vector(p.h_cw[k] * pcbar + p.h_fw[k] * pfbar + p.h_uw[k] * pubar +
                  p.h_ww[k] * pwbar);
    cbar = cbar_prev;
  }
  // c_0 is the zero constant, so cbar is dropped here.
  const Vector pybar0 =
      (activation_derivative(sigma_y, pre_y[0]).array() * ubar.array()).matrix();
  g_yw[0] = pybar0.dot(w[0]);
  g_yx[0] = pybar0.dot(x);
  out.grad_x += p.h_yx[0] * pybar0;
  wbar += p.h_yw[0] * pybar0;
  out.grad_x += wbar;  // w_0 = x

  out.grad_params.resize(10 * (K + 1));
  out.grad_params << g_cw, g_cx, g_fw, g_fx, g_uw, g_ux, g_ww, g_wx, g_yw, g_yx;
  return out;
}

}  // namespace

FilterVjp filter_vjp(const ShiftOperator& s, const FilterParams& p, const Vector& x,
                     Activation sigma_w, Activation sigma_y, const Vector& upstream) {
  check_dims(s, x, "filter_vjp");
  if (upstream.size() != x.size()) {
    throw std::invalid_argument("filter_vjp: upstream length mismatch");
  }
  if (const auto* g = std::get_if<GcnnFilterParams>(&p)) {
    return gcnn_vjp(s, *g, x, upstream);
  }
  if (const auto* r = std::get_if<RsnFilterParams>(&p)) {
    return rsn_vjp(s, *r, x, sigma_w, sigma_y, upstream);
  }
  return lssm_vjp(s, std::get<LssmFilterParams>(p), x, sigma_y, upstream);
}

}  // namespace gssf
