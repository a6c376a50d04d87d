#include "gssf/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "gssf/errors.hpp"

namespace gssf {

std::string to_string(StabilityClass cls) {
  switch (cls) {
    case StabilityClass::Exploding: return "exploding";
    case StabilityClass::Vanishing: return "vanishing";
    case StabilityClass::Marginal: return "marginal";
  }
  throw std::invalid_argument("bad stability class enum");
}

StabilityReport state_norm_trace(const ShiftOperator& s, const Vector& x, int order) {
  if (order < 1) throw std::invalid_argument("state_norm_trace: order must be >= 1");
  if (s.matrix.cols() != x.size()) {
    throw std::invalid_argument("state_norm_trace: signal/shift size mismatch");
  }
  StabilityReport report;
  report.norms.resize(order + 1);
  Vector w = x;
  report.norms[0] = w.norm();
  for (int k = 1; k <= order; ++k) {
    w = s.matrix * w;
    report.norms[k] = w.norm();
  }

  const int window = (order + 1) / 2;  // last ceil(K/2) ratios
  double log_sum = 0.0;
  int counted = 0;
  for (int k = order - window + 1; k <= order; ++k) {
    if (report.norms[k - 1] > 0.0 && report.norms[k] > 0.0) {
      log_sum += std::log(report.norms[k] / report.norms[k - 1]);
      ++counted;
    }
  }
  report.growth_rate = counted > 0 ? std::exp(log_sum / counted) : 0.0;
  report.classification = report.growth_rate > 1.05 ? StabilityClass::Exploding
                          : report.growth_rate < 0.95 ? StabilityClass::Vanishing
                                                      : StabilityClass::Marginal;

  const PowerIterationResult dominant = power_iteration(s.matrix);
  report.spectral_radius = dominant.value;
  const double x_norm = x.norm();
  report.alignment = x_norm > 0.0 ? std::abs(x.dot(dominant.vector)) / x_norm : 0.0;
  return report;
}

FilterTraceComparison compare_filter_traces(const ShiftOperator& s, const Vector& x,
                                            int order, const GcnnFilterParams& gcnn,
                                            const RsnFilterParams& rsn,
                                            const LssmFilterParams& lssm,
                                            Activation sigma_w, Activation sigma_y) {
  if (gcnn.order() != order || rsn.order() != order || lssm.order() != order) {
    throw std::invalid_argument("compare_filter_traces: parameter orders disagree");
  }
  FilterTraceComparison cmp;
  cmp.norms_gcnn = gcnn_filter_recursive(s, gcnn, x).trace.state_norms;
  cmp.norms_rsn = rsn_filter(s, rsn, x, sigma_w, sigma_y).trace.state_norms;
  cmp.norms_lssm = lssm_filter(s, lssm, x, sigma_y).trace.state_norms;
  return cmp;
}

void save_stability_csv(const StabilityReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("save_stability_csv: cannot open " + path);
  out << "k,norm\n";
  char line[64];
  for (Index k = 0; k < report.norms.size(); ++k) {
    std::snprintf(line, sizeof(line), "%ld,%.17g\n", static_cast<long>(k),
                  report.norms[k]);
    out << line;
  }
}

void save_stability_json(const StabilityReport& report, const std::string& path,
                         const nlohmann::json& meta) {
  nlohmann::json doc;
  doc["norms"] = std::vector<double>(report.norms.data(),
                                     report.norms.data() + report.norms.size());
  doc["growth_rate"] = report.growth_rate;
  doc["classification"] = to_string(report.classification);
  doc["spectral_radius"] = report.spectral_radius;
  doc["alignment"] = report.alignment;
  doc["meta"] = meta;
  std::ofstream out(path);
  if (!out) throw ParseError("save_stability_json: cannot open " + path);
  out << doc.dump(2) << "\n";
}

void save_comparison_csv(const FilterTraceComparison& cmp, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("save_comparison_csv: cannot open " + path);
  out << "k,norm_gcnn,norm_rsn,norm_lssm\n";
  char line[128];
  for (Index k = 0; k < cmp.norms_gcnn.size(); ++k) {
    std::snprintf(line, sizeof(line), "%ld,%.17g,%.17g,%.17g\n", static_cast<long>(k),
                  cmp.norms_gcnn[k], cmp.norms_rsn[k], cmp.norms_lssm[k]);
    out << line;
  }
}

}  // namespace gssf
