#include "gssf/models.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "gssf/errors.hpp"

namespace gssf {

using nlohmann::json;

namespace {

Index layer_param_size(const LayerSpec& spec) {
  return filter_param_size(spec.kind, spec.order) * spec.in_features * spec.out_features;
}

}  // namespace

Index Model::param_total() const {
  Index total = 0;
  for (const Layer& layer : layers) total += layer_param_size(layer.spec);
  return total + readout_weight.size() + readout_bias.size();
}

Vector Model::flat_params() const {
  Vector flat(param_total());
  Index at = 0;
  for (const Layer& layer : layers) {
    for (const FilterParams& p : layer.bank) {
      const Vector v = filter_params_flat(p);
      flat.segment(at, v.size()) = v;
      at += v.size();
    }
  }
  for (Index c = 0; c < readout_weight.rows(); ++c) {
    flat.segment(at, readout_weight.cols()) = readout_weight.row(c);
    at += readout_weight.cols();
  }
  flat.segment(at, readout_bias.size()) = readout_bias;
  return flat;
}

void Model::set_flat_params(const Vector& flat) {
  if (flat.size() != param_total()) {
    throw std::invalid_argument("set_flat_params: expected " +
                                std::to_string(param_total()) + " scalars, got " +
                                std::to_string(flat.size()));
  }
  Index at = 0;
  for (Layer& layer : layers) {
    const Index sz = filter_param_size(layer.spec.kind, layer.spec.order);
    for (FilterParams& p : layer.bank) {
      set_filter_params_flat(p, flat.segment(at, sz));
      at += sz;
    }
  }
  for (Index c = 0; c < readout_weight.rows(); ++c) {
    readout_weight.row(c) = flat.segment(at, readout_weight.cols());
    at += readout_weight.cols();
  }
  readout_bias = flat.segment(at, readout_bias.size());
}

Model init_model(const std::vector<LayerSpec>& specs, Index n_nodes, int classes,
                 Rng& rng) {
  if (specs.empty()) throw std::invalid_argument("init_model: no layers");
  if (n_nodes < 1 || classes < 1) {
    throw std::invalid_argument("init_model: need n_nodes >= 1 and classes >= 1");
  }
  if (specs.front().in_features != 1) {
    throw std::invalid_argument("init_model: first layer must take one input feature");
  }
  for (size_t l = 0; l + 1 < specs.size(); ++l) {
    if (specs[l].out_features != specs[l + 1].in_features) {
      throw std::invalid_argument("init_model: feature counts of layers " +
                                  std::to_string(l) + " and " + std::to_string(l + 1) +
                                  " do not chain");
    }
  }

  Model m;
  m.n_nodes = n_nodes;
  m.classes = classes;
  for (const LayerSpec& spec : specs) {
    if (spec.in_features < 1 || spec.out_features < 1) {
      throw std::invalid_argument("init_model: feature counts must be >= 1");
    }
    Layer layer;
    layer.spec = spec;
    layer.bank.reserve(static_cast<size_t>(spec.in_features) * spec.out_features);
    for (int f = 0; f < spec.out_features; ++f) {
      for (int g = 0; g < spec.in_features; ++g) {
        layer.bank.push_back(init_filter_params(spec.kind, spec.order, rng));
      }
    }
    m.layers.push_back(std::move(layer));
  }

  const Index fan_in = n_nodes * m.feature_dim_out();
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  m.readout_weight.resize(classes, fan_in);
  for (Index c = 0; c < classes; ++c) {
    m.readout_weight.row(c) = rng.uniform_vector(fan_in, -bound, bound);
  }
  m.readout_bias = Vector::Zero(classes);
  return m;
}

LayerResult layer_forward(const Layer& layer, const ShiftOperator& s,
                          const Matrix& x_in) {
  const LayerSpec& spec = layer.spec;
  if (x_in.cols() != spec.in_features) {
    throw std::invalid_argument("layer_forward: expected " +
                                std::to_string(spec.in_features) + " input features, got " +
                                std::to_string(x_in.cols()));
  }
  const Index n = x_in.rows();
  LayerResult r;
  r.pre_act = Matrix::Zero(n, spec.out_features);
  for (int f = 0; f < spec.out_features; ++f) {
    for (int g = 0; g < spec.in_features; ++g) {
      const FilterResult fr = apply_filter(s, layer.filter(f, g), x_in.col(g),
                                           spec.sigma_w, spec.sigma_y);
      r.pre_act.col(f) += fr.y;
    }
  }
  r.output = apply_activation(spec.sigma, r.pre_act);
  return r;
}

Vector flatten_node_major(const Matrix& features) {
  Vector flat(features.size());
  const Index f_dim = features.cols();
  for (Index i = 0; i < features.rows(); ++i) {
    flat.segment(i * f_dim, f_dim) = features.row(i);
  }
  return flat;
}

std::pair<Vector, ForwardCache> model_forward(const Model& m, const ShiftOperator& s,
                                              const Vector& x) {
  if (x.size() != m.n_nodes) {
    throw std::invalid_argument("model_forward: signal length does not match model");
  }
  ForwardCache cache;
  Matrix features = x;
  for (const Layer& layer : m.layers) {
    cache.inputs.push_back(features);
    LayerResult r = layer_forward(layer, s, features);
    cache.pre_act.push_back(std::move(r.pre_act));
    features = std::move(r.output);
  }
  cache.features = features;
  cache.flat_features = flatten_node_major(features);
  cache.logits = m.readout_weight * cache.flat_features + m.readout_bias;
  return {cache.logits, std::move(cache)};
}

Vector model_backward(const Model& m, const ShiftOperator& s, const Vector& x,
                      const ForwardCache& cache, const Vector& grad_logits) {
  const size_t n_layers = m.layers.size();
  if (cache.inputs.size() != n_layers || cache.pre_act.size() != n_layers ||
      cache.inputs.empty() || cache.inputs.front().rows() != m.n_nodes ||
      cache.inputs.front().col(0) != x ||
      cache.flat_features.size() != m.readout_weight.cols()) {
    throw std::invalid_argument("model_backward: cache does not match model and input");
  }
  if (grad_logits.size() != m.classes) {
    throw std::invalid_argument("model_backward: grad_logits length mismatch");
  }

  Vector flat_grad = Vector::Zero(m.param_total());

  // Readout is affine: dW = g f^T, db = g, d(features) = W^T g.
  Index at = flat_grad.size() - m.readout_weight.size() - m.readout_bias.size();
  for (Index c = 0; c < m.classes; ++c) {
    flat_grad.segment(at, m.readout_weight.cols()) =
        grad_logits[c] * cache.flat_features;
    at += m.readout_weight.cols();
  }
  flat_grad.segment(at, m.readout_bias.size()) = grad_logits;

  const Vector grad_flat_features = m.readout_weight.transpose() * grad_logits;
  const int f_out_last = m.feature_dim_out();
  Matrix grad_features(m.n_nodes, f_out_last);
  for (Index i = 0; i < m.n_nodes; ++i) {
    grad_features.row(i) = grad_flat_features.segment(i * f_out_last, f_out_last);
  }

  // Per-layer flat offsets.
  std::vector<Index> offsets(n_layers);
  Index off = 0;
  for (size_t l = 0; l < n_layers; ++l) {
    offsets[l] = off;
    off += layer_param_size(m.layers[l].spec);
  }

  for (size_t l = n_layers; l-- > 0;) {
    const Layer& layer = m.layers[l];
    const LayerSpec& spec = layer.spec;
    const Matrix dz =
        (activation_derivative(spec.sigma, cache.pre_act[l]).array() *
         grad_features.array())
            .matrix();
    Matrix grad_in = Matrix::Zero(m.n_nodes, spec.in_features);
    const Index filter_sz = filter_param_size(spec.kind, spec.order);
    Index seg = offsets[l];
    for (int f = 0; f < spec.out_features; ++f) {
      for (int g = 0; g < spec.in_features; ++g) {
        const FilterVjp vjp = filter_vjp(s, layer.filter(f, g), cache.inputs[l].col(g),
                                         spec.sigma_w, spec.sigma_y, dz.col(f));
        flat_grad.segment(seg, filter_sz) = vjp.grad_params;
        grad_in.col(g) += vjp.grad_x;
        seg += filter_sz;
      }
    }
    grad_features = std::move(grad_in);
  }
  return flat_grad;
}

ParamCount param_count(const Model& m) {
  ParamCount pc;
  for (const Layer& layer : m.layers) {
    const LayerSpec& spec = layer.spec;
    const Index pairs = static_cast<Index>(spec.in_features) * spec.out_features;
    pc.literal += filter_param_size(spec.kind, spec.order) * pairs;
    switch (spec.kind) {
      case FilterKind::Gcnn: pc.remark_formula += spec.order * pairs; break;
      case FilterKind::Rsn: pc.remark_formula += 4 * spec.order * pairs; break;
      case FilterKind::Lssm: pc.remark_formula += 10 * (spec.order + 1) * pairs; break;
    }
  }
  pc.readout = m.readout_weight.size() + m.readout_bias.size();
  return pc;
}

namespace {

json layer_spec_to_json(const LayerSpec& spec) {
  return json{{"kind", to_string(spec.kind)},
              {"in_features", spec.in_features},
              {"out_features", spec.out_features},
              {"order", spec.order},
              {"activation", to_string(spec.sigma)},
              {"state_activation", to_string(spec.sigma_w)},
              {"output_activation", to_string(spec.sigma_y)}};
}

LayerSpec layer_spec_from_json(const json& j) {
  LayerSpec spec;
  spec.kind = filter_kind_from_string(j.at("kind").get<std::string>());
  spec.in_features = j.at("in_features").get<int>();
  spec.out_features = j.at("out_features").get<int>();
  spec.order = j.at("order").get<int>();
  spec.sigma = activation_from_string(j.at("activation").get<std::string>());
  spec.sigma_w = activation_from_string(j.at("state_activation").get<std::string>());
  spec.sigma_y = activation_from_string(j.at("output_activation").get<std::string>());
  return spec;
}

}  // namespace

void save_checkpoint(const Model& m, const std::string& path, const json& meta) {
  json layers = json::array();
  for (const Layer& layer : m.layers) layers.push_back(layer_spec_to_json(layer.spec));
  const Vector flat = m.flat_params();
  json doc;
  doc["format"] = "gssf-checkpoint-v1";
  doc["n"] = m.n_nodes;
  doc["classes"] = m.classes;
  doc["layers"] = std::move(layers);
  doc["params"] = std::vector<double>(flat.data(), flat.data() + flat.size());
  doc["meta"] = meta;
  std::ofstream out(path);
  if (!out) throw ParseError("save_checkpoint: cannot open " + path);
  out << doc.dump(2) << "\n";
}

std::pair<Model, json> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_checkpoint: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ParseError("load_checkpoint: " + path + ": " + e.what());
  }
  try {
    Model m;
    m.n_nodes = doc.at("n").get<Index>();
    m.classes = doc.at("classes").get<int>();
    for (const json& j : doc.at("layers")) {
      const LayerSpec spec = layer_spec_from_json(j);
      Layer layer;
      layer.spec = spec;
      for (int i = 0; i < spec.in_features * spec.out_features; ++i) {
        layer.bank.push_back(zero_filter_params(spec.kind, spec.order));
      }
      m.layers.push_back(std::move(layer));
    }
    if (m.layers.empty()) throw ParseError("load_checkpoint: no layers");
    m.readout_weight.resize(m.classes, m.n_nodes * m.feature_dim_out());
    m.readout_bias.resize(m.classes);
    const auto params = doc.at("params").get<std::vector<double>>();
    if (static_cast<Index>(params.size()) != m.param_total()) {
      throw ParseError("load_checkpoint: 'params' has " + std::to_string(params.size()) +
                       " scalars, model needs " + std::to_string(m.param_total()));
    }
    m.set_flat_params(Eigen::Map<const Vector>(params.data(), params.size()));
    for (double v : params) {
      if (!std::isfinite(v)) throw ParseError("load_checkpoint: non-finite parameter");
    }
    return {std::move(m), doc.value("meta", json::object())};
  } catch (const json::exception& e) {
    throw ParseError("load_checkpoint: " + path + ": " + e.what());
  }
}

}  // namespace gssf
