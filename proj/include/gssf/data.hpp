#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gssf/graph.hpp"
#include "gssf/types.hpp"

namespace gssf {

struct SampleMeta {
  Index source = 0;  // delta location
  int t = 0;         // diffusion time
};

struct Sample {
  Vector signal;
  int label = 0;
  std::optional<SampleMeta> meta;
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<Index> train, val, test;  // disjoint index lists
  Index n = 0;
  int classes = 0;
  std::string provenance;
};

// Checks split disjointness/range and that every class appears in the
// training split; throws on violation.
void validate_dataset(const Dataset& d);

// Source-localization samples: community drawn uniformly, source node
// uniformly within it, t uniform on {0..t_max}; signal = S^t delta(source),
// label = community. Splits are contiguous (train, then val, then test).
Dataset make_source_loc_dataset(const Graph& g, const ShiftOperator& s,
                                Index n_train, Index n_val, Index n_test, int t_max,
                                Rng& rng);

// Uniform shuffle then contiguous split; reshuffles (bounded retries) until
// every class appears in the training split.
Dataset split_dataset(std::vector<Sample> samples,
                      const std::array<double, 3>& fractions, Rng& rng);

// Flat JSON document {"n", "classes", "samples": [{"x", "label", "meta"}],
// "splits": {"train", "val", "test"}, "provenance"}.
void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace gssf
