#pragma once

#include <string>

#include "json.hpp"

#include "gssf/filters.hpp"

namespace gssf {

enum class StabilityClass { Exploding, Vanishing, Marginal };

std::string to_string(StabilityClass cls);

struct StabilityReport {
  Vector norms;              // ||w_k||_2 for k = 0..K under w_k = S w_{k-1}
  double growth_rate = 0.0;  // geometric mean of the last ceil(K/2) ratios
  StabilityClass classification = StabilityClass::Marginal;
  double spectral_radius = 0.0;  // of s.matrix
  double alignment = 0.0;        // |<x, v1>| / ||x||, v1 the dominant eigenvector
};

// Runs the bare linear shift recursion and classifies the measured growth
// rate: > 1.05 exploding, < 0.95 vanishing, marginal otherwise.
StabilityReport state_norm_trace(const ShiftOperator& s, const Vector& x, int order);

struct FilterTraceComparison {
  Vector norms_gcnn, norms_rsn, norms_lssm;  // ||w_k||_2, k = 0..K
};

// Side-by-side state norms of the three filter kinds on one (s, x, K); pure
// reporting, no assertion.
FilterTraceComparison compare_filter_traces(const ShiftOperator& s, const Vector& x,
                                            int order, const GcnnFilterParams& gcnn,
                                            const RsnFilterParams& rsn,
                                            const LssmFilterParams& lssm,
                                            Activation sigma_w, Activation sigma_y);

// CSV rows (k, norm); JSON carries the scalar summary plus caller metadata.
void save_stability_csv(const StabilityReport& report, const std::string& path);
void save_stability_json(const StabilityReport& report, const std::string& path,
                         const nlohmann::json& meta = nlohmann::json::object());

// CSV rows (k, norm_gcnn, norm_rsn, norm_lssm).
void save_comparison_csv(const FilterTraceComparison& cmp, const std::string& path);

}  // namespace gssf
