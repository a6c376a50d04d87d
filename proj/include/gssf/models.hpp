#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gssf/filters.hpp"

namespace gssf {

struct LayerSpec {
  FilterKind kind = FilterKind::Gcnn;
  int in_features = 1;
  int out_features = 1;
  int order = 1;
  Activation sigma = Activation::Relu;    // outer nonlinearity around the bank sum
  Activation sigma_w = Activation::Relu;  // state activation (rsn)
  Activation sigma_y = Activation::Relu;  // instantaneous-output activation (rsn/lssm)
};

struct Layer {
  LayerSpec spec;
  std::vector<FilterParams> bank;  // bank[f * in_features + g]

  const FilterParams& filter(int f, int g) const {
    return bank[static_cast<size_t>(f) * spec.in_features + g];
  }
  FilterParams& filter(int f, int g) {
    return bank[static_cast<size_t>(f) * spec.in_features + g];
  }
};

// Layered filter banks plus a single affine readout over the node-major
// flattened feature matrix. The flat parameter vector concatenates, in order:
// each layer's bank (f-major, then the per-filter canonical layout), the
// readout weights row by row, and the readout bias.
struct Model {
  Index n_nodes = 0;
  int classes = 0;
  std::vector<Layer> layers;
  Matrix readout_weight;  // classes x (n_nodes * F_L)
  Vector readout_bias;    // classes

  int feature_dim_out() const { return layers.back().spec.out_features; }
  Index param_total() const;
  Vector flat_params() const;
  void set_flat_params(const Vector& flat);
};

// Validates the layer chain (first layer takes one feature, adjacent feature
// counts match) and draws all parameters from the scaled-uniform init.
Model init_model(const std::vector<LayerSpec>& specs, Index n_nodes, int classes,
                 Rng& rng);

struct ForwardCache {
  std::vector<Matrix> inputs;   // per-layer input features (N x F_in)
  std::vector<Matrix> pre_act;  // per-layer bank sums before sigma (N x F_out)
  Matrix features;              // final N x F_L
  Vector flat_features;         // node-major flatten of `features`
  Vector logits;
};

struct LayerResult {
  Matrix output;   // sigma(pre_act)
  Matrix pre_act;  // sum over g of filter outputs, per output feature
};

LayerResult layer_forward(const Layer& layer, const ShiftOperator& s,
                          const Matrix& x_in);

// flat[i * F + f] = features(i, f)
Vector flatten_node_major(const Matrix& features);

std::pair<Vector, ForwardCache> model_forward(const Model& m, const ShiftOperator& s,
                                              const Vector& x);

// Exact gradient of <grad_logits, logits> with respect to the flat parameter
// vector; layout matches Model::flat_params. The cache must come from a
// model_forward of the same model and input.
Vector model_backward(const Model& m, const ShiftOperator& s, const Vector& x,
                      const ForwardCache& cache, const Vector& grad_logits);

struct ParamCount {
  Index literal = 0;         // stored filter scalars (readout excluded)
  Index remark_formula = 0;  // per layer: K F^2 / 4K F^2 / 10(K+1) F^2
  Index readout = 0;
};

ParamCount param_count(const Model& m);

// Checkpoint file: model config, flat parameter array, free-form metadata.
void save_checkpoint(const Model& m, const std::string& path,
                     const nlohmann::json& meta);
std::pair<Model, nlohmann::json> load_checkpoint(const std::string& path);

}  // namespace gssf
