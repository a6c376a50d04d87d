#include "gssf/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "gssf/errors.hpp"

namespace gssf {

using nlohmann::json;

Vector softmax(const Vector& logits) {
  const double mx = logits.maxCoeff();
  Vector ex = (logits.array() - mx).exp().matrix();
  return ex / ex.sum();
}

CrossEntropyResult cross_entropy(const Vector& logits, int label) {
  if (label < 0 || label >= logits.size()) {
    throw std::invalid_argument("cross_entropy: label out of range");
  }
  const double mx = logits.maxCoeff();
  const Vector shifted = logits.array() - mx;
  const Vector ex = shifted.array().exp().matrix();
  const double z = ex.sum();
  CrossEntropyResult r;
  r.loss = std::log(z) - shifted[label];
  r.grad_logits = ex / z;
  r.grad_logits[label] -= 1.0;
  return r;
}

void adam_step(Vector& params, const Vector& grads, OptimizerState& state,
               const TrainConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  state.t += 1;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads;
  state.v = (cfg.beta2 * state.v.array() + (1.0 - cfg.beta2) * grads.array().square())
                .matrix();
  const double m_corr = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double v_corr = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  params.array() -= cfg.learning_rate * (state.m.array() / m_corr) /
                    ((state.v.array() / v_corr).sqrt() + cfg.epsilon);
}

EvalResult evaluate(const Model& m, const ShiftOperator& s, const Dataset& data,
                    const std::vector<Index>& split) {
  EvalResult r;
  r.confusion.assign(m.classes, std::vector<long>(m.classes, 0));
  if (split.empty()) return r;
  long correct = 0;
  for (Index idx : split) {
    const Sample& sample = data.samples[idx];
    const auto [logits, cache] = model_forward(m, s, sample.signal);
    Index predicted = 0;
    logits.maxCoeff(&predicted);
    r.confusion[sample.label][predicted] += 1;
    if (static_cast<int>(predicted) == sample.label) ++correct;
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(split.size());
  return r;
}

namespace {

void validate_config(const TrainConfig& cfg) {
  if (!(cfg.beta1 > 0.0 && cfg.beta1 < 1.0 && cfg.beta2 > 0.0 && cfg.beta2 < 1.0)) {
    throw std::invalid_argument("train: betas must lie in (0, 1)");
  }
  if (cfg.learning_rate <= 0.0) throw std::invalid_argument("train: learning_rate must be > 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (cfg.epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
}

}  // namespace

TrainReport train(Model& model, const ShiftOperator& s, const Dataset& data,
                  const TrainConfig& cfg) {
  validate_config(cfg);
  if (cfg.epochs > 0 && data.train.empty()) {
    throw std::invalid_argument("train: empty training split");
  }
  const auto t0 = std::chrono::steady_clock::now();

  TrainReport report;
  report.config = cfg;

  Vector params = model.flat_params();
  OptimizerState opt = OptimizerState::zero(params.size());
  Rng shuffle_rng = Rng(cfg.seed).child(seed_stage::kShuffle);

  Vector best_params = params;
  double best_val = -1.0;
  int best_epoch = 0;

  std::vector<Index> order = data.train;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    double loss_sum = 0.0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::vector<Index> batch(order.begin() + start, order.begin() + stop);
      std::sort(batch.begin(), batch.end());  // deterministic reduction order

      Vector grad_sum = Vector::Zero(params.size());
      for (Index idx : batch) {
        const Sample& sample = data.samples[idx];
        const auto [logits, cache] = model_forward(model, s, sample.signal);
        const CrossEntropyResult ce = cross_entropy(logits, sample.label);
        if (!std::isfinite(ce.loss)) {
          throw NumericalError(
              "train: non-finite loss at epoch " + std::to_string(epoch) +
              ", sample " + std::to_string(idx) +
              "; lower the learning rate or normalize the shift operator");
        }
        loss_sum += ce.loss;
        grad_sum += model_backward(model, s, sample.signal, cache, ce.grad_logits);
      }
      const Vector grad = grad_sum / static_cast<double>(batch.size());
      adam_step(params, grad, opt, cfg);
      model.set_flat_params(params);
    }

    EpochRow row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(order.size());
    row.val_accuracy = evaluate(model, s, data, data.val).accuracy;
    report.epochs.push_back(row);

    if (row.val_accuracy >= best_val) {  // later epoch wins ties
      best_val = row.val_accuracy;
      best_params = params;
      best_epoch = epoch;
    }
  }

  model.set_flat_params(best_params);
  report.best_epoch = best_epoch;
  report.best_val_accuracy = std::max(best_val, 0.0);
  report.test_accuracy = evaluate(model, s, data, data.test).accuracy;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& loss,
                        const Vector& params, double step) {
  if (step <= 0.0) throw std::invalid_argument("finite_diff_grad: step must be > 0");
  Vector grad(params.size());
  Vector probe = params;
  for (Index i = 0; i < params.size(); ++i) {
    probe[i] = params[i] + step;
    const double up = loss(probe);
    probe[i] = params[i] - step;
    const double down = loss(probe);
    probe[i] = params[i];
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double gradient_rel_error(const Vector& analytic, const Vector& numeric) {
  if (analytic.size() != numeric.size()) {
    throw std::invalid_argument("gradient_rel_error: length mismatch");
  }
  double worst = 0.0;
  for (Index i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-3});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

GradCheckReport run_gradient_checks(const GradCheckOptions& opts) {
  GradCheckReport report;
  Rng rng(opts.seed);
  for (FilterKind kind : opts.kinds) {
    for (int n_layers : opts.layer_counts) {
      for (int order : opts.orders) {
        for (int inst = 0; inst < opts.instances; ++inst) {
          // Random symmetric shift, normalized to unit spectral radius.
          Matrix a(opts.n_nodes, opts.n_nodes);
          for (Index i = 0; i < opts.n_nodes; ++i) {
            for (Index j = i; j < opts.n_nodes; ++j) {
              a(i, j) = a(j, i) = rng.uniform(-1.0, 1.0);
            }
          }
          Graph g{opts.n_nodes, a, std::nullopt, false};
          const ShiftOperator s = normalize_shift(g);

          // Smooth activations keep finite differences clean.
          std::vector<LayerSpec> specs;
          for (int l = 0; l < n_layers; ++l) {
            LayerSpec spec;
            spec.kind = kind;
            spec.in_features = l == 0 ? 1 : opts.features;
            spec.out_features = opts.features;
            spec.order = order;
            spec.sigma = Activation::Tanh;
            spec.sigma_w = Activation::Tanh;
            spec.sigma_y = Activation::Tanh;
            specs.push_back(spec);
          }
          Model model = init_model(specs, opts.n_nodes, opts.classes, rng);
          const Vector x = rng.uniform_vector(opts.n_nodes, -1.0, 1.0);
          const int label = static_cast<int>(rng.uniform_int(0, opts.classes - 1));

          const auto [logits, cache] = model_forward(model, s, x);
          const CrossEntropyResult ce = cross_entropy(logits, label);
          const Vector analytic = model_backward(model, s, x, cache, ce.grad_logits);

          Model probe_model = model;
          const auto loss_fn = [&](const Vector& p) {
            probe_model.set_flat_params(p);
            const auto [probe_logits, probe_cache] = model_forward(probe_model, s, x);
            return cross_entropy(probe_logits, label).loss;
          };
          const Vector numeric =
              finite_diff_grad(loss_fn, model.flat_params(), opts.step);

          report.worst_rel_error =
              std::max(report.worst_rel_error, gradient_rel_error(analytic, numeric));
          report.cases += 1;
        }
      }
    }
  }
  report.passed = report.worst_rel_error < opts.tolerance;
  return report;
}

namespace {

json config_to_json(const TrainConfig& cfg) {
  return json{{"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size},
              {"learning_rate", cfg.learning_rate},
              {"beta1", cfg.beta1},
              {"beta2", cfg.beta2},
              {"epsilon", cfg.epsilon},
              {"seed", cfg.seed}};
}

}  // namespace

void save_report_json(const TrainReport& report, const std::string& path,
                      const json& extra_meta) {
  json rows = json::array();
  for (const EpochRow& row : report.epochs) {
    rows.push_back(json{{"epoch", row.epoch},
                        {"train_loss", row.train_loss},
                        {"val_accuracy", row.val_accuracy}});
  }
  json doc;
  doc["config"] = config_to_json(report.config);
  doc["epochs"] = std::move(rows);
  doc["best_epoch"] = report.best_epoch;
  doc["best_val_accuracy"] = report.best_val_accuracy;
  doc["test_accuracy"] = report.test_accuracy;
  doc["meta"] = extra_meta;
  std::ofstream out(path);
  if (!out) throw ParseError("save_report_json: cannot open " + path);
  out << doc.dump(2) << "\n";
}

void save_report_csv(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("save_report_csv: cannot open " + path);
  out << "epoch,train_loss,val_accuracy\n";
  char line[128];
  for (const EpochRow& row : report.epochs) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", row.epoch, row.train_loss,
                  row.val_accuracy);
    out << line;
  }
}

}  // namespace gssf
