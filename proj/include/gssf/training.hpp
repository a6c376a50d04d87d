#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gssf/data.hpp"
#include "gssf/models.hpp"

namespace gssf {

// Seed-stream tags; all run randomness derives from one root seed.
namespace seed_stage {
inline constexpr std::uint64_t kGraph = 1;
inline constexpr std::uint64_t kData = 2;
inline constexpr std::uint64_t kInit = 3;
inline constexpr std::uint64_t kShuffle = 4;
}  // namespace seed_stage

struct TrainConfig {
  int epochs = 40;
  int batch_size = 100;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
};

struct OptimizerState {
  Vector m;  // first moment
  Vector v;  // second moment, element-wise >= 0
  long t = 0;

  static OptimizerState zero(Index size) {
    return {Vector::Zero(size), Vector::Zero(size), 0};
  }
};

Vector softmax(const Vector& logits);

struct CrossEntropyResult {
  double loss = 0.0;
  Vector grad_logits;  // softmax(logits) - onehot(label)
};

// -log softmax(logits)[label], computed with max-subtraction.
CrossEntropyResult cross_entropy(const Vector& logits, int label);

// Standard bias-corrected update; element-wise, order-independent.
void adam_step(Vector& params, const Vector& grads, OptimizerState& state,
               const TrainConfig& cfg);

struct EpochRow {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochRow> epochs;
  double test_accuracy = 0.0;
  int best_epoch = 0;  // 0 when untrained (epochs == 0)
  double best_val_accuracy = 0.0;
  double wall_seconds = 0.0;  // console-only; kept out of the serialized files
  TrainConfig config;
};

struct EvalResult {
  double accuracy = 0.0;
  std::vector<std::vector<long>> confusion;  // [true][predicted]
};

EvalResult evaluate(const Model& m, const ShiftOperator& s, const Dataset& data,
                    const std::vector<Index>& split);

// Mini-batch ADAM training: per-epoch reshuffle from the config seed, mean
// batch gradients accumulated in ascending sample-index order, parameters
// selected by best validation accuracy (last epoch wins ties). The model is
// left holding the selected parameters. Throws NumericalError on NaN loss.
TrainReport train(Model& model, const ShiftOperator& s, const Dataset& data,
                  const TrainConfig& cfg);

// Central finite differences, coordinate by coordinate.
Vector finite_diff_grad(const std::function<double(const Vector&)>& loss,
                        const Vector& params, double step);

// Relative error with a small-denominator floor; guards finite-difference
// noise on near-zero coordinates.
double gradient_rel_error(const Vector& analytic, const Vector& numeric);

struct GradCheckOptions {
  std::vector<FilterKind> kinds = {FilterKind::Gcnn, FilterKind::Rsn, FilterKind::Lssm};
  std::vector<int> layer_counts = {1, 2};
  std::vector<int> orders = {2, 3};
  int features = 2;
  Index n_nodes = 8;
  int classes = 3;
  int instances = 20;
  double step = 1e-5;
  double tolerance = 1e-5;
  std::uint64_t seed = 7;
};

struct GradCheckReport {
  double worst_rel_error = 0.0;
  int cases = 0;
  bool passed = false;
};

// Full-model gradients vs. central finite differences over random instances
// with smooth activations (relu kinks are excluded by construction).
GradCheckReport run_gradient_checks(const GradCheckOptions& opts);

// Report files; wall-clock is deliberately not serialized so identical seeds
// give byte-identical outputs.
void save_report_json(const TrainReport& report, const std::string& path,
                      const nlohmann::json& extra_meta);
void save_report_csv(const TrainReport& report, const std::string& path);

}  // namespace gssf
