#include "gssf/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "gssf/errors.hpp"

namespace gssf {

using nlohmann::json;

void validate_dataset(const Dataset& d) {
  const Index total = static_cast<Index>(d.samples.size());
  std::set<Index> seen;
  for (const std::vector<Index>* split : {&d.train, &d.val, &d.test}) {
    for (Index i : *split) {
      if (i < 0 || i >= total) throw ParseError("dataset: split index out of range");
      if (!seen.insert(i).second) throw ParseError("dataset: splits are not disjoint");
    }
  }
  std::vector<bool> in_train(d.classes, false);
  for (Index i : d.train) {
    const Sample& sample = d.samples[i];
    if (sample.label < 0 || sample.label >= d.classes) {
      throw ParseError("dataset: label out of range");
    }
    in_train[sample.label] = true;
  }
  for (int c = 0; c < d.classes; ++c) {
    if (!in_train[c]) {
      throw ParseError("dataset: class " + std::to_string(c) +
                       " missing from the training split");
    }
  }
  for (const Sample& sample : d.samples) {
    if (sample.signal.size() != d.n) throw ParseError("dataset: signal length mismatch");
    if (!sample.signal.allFinite()) throw ParseError("dataset: non-finite signal");
    if (sample.label < 0 || sample.label >= d.classes) {
      throw ParseError("dataset: label out of range");
    }
  }
}

namespace {

std::vector<std::vector<Index>> nodes_by_community(const Graph& g, int classes) {
  std::vector<std::vector<Index>> members(classes);
  for (Index i = 0; i < g.n; ++i) members[(*g.communities)[i]].push_back(i);
  return members;
}

Sample draw_diffused_delta(const ShiftOperator& s,
                           const std::vector<std::vector<Index>>& members, int t_max,
                           Rng& rng) {
  const int community = static_cast<int>(rng.uniform_int(0, static_cast<int>(members.size()) - 1));
  const auto& nodes = members[community];
  const Index source = nodes[rng.uniform_int(0, static_cast<std::int64_t>(nodes.size()) - 1)];
  const int t = static_cast<int>(rng.uniform_int(0, t_max));
  Vector x = Vector::Zero(s.matrix.rows());
  x[source] = 1.0;
  for (int step = 0; step < t; ++step) x = s.matrix * x;
  return Sample{std::move(x), community, SampleMeta{source, t}};
}

}  // namespace

Dataset make_source_loc_dataset(const Graph& g, const ShiftOperator& s,
                                Index n_train, Index n_val, Index n_test, int t_max,
                                Rng& rng) {
  if (!g.communities) {
    throw std::invalid_argument("make_source_loc_dataset: graph has no communities");
  }
  if (t_max < 0 || n_train < 0 || n_val < 0 || n_test < 0) {
    throw std::invalid_argument("make_source_loc_dataset: negative size");
  }
  if (s.matrix.rows() != g.n) {
    throw std::invalid_argument("make_source_loc_dataset: shift/graph size mismatch");
  }
  const int classes = g.community_count();
  const auto members = nodes_by_community(g, classes);
  const Index total = n_train + n_val + n_test;

  constexpr int kMaxRetries = 100;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    Dataset d;
    d.n = g.n;
    d.classes = classes;
    d.samples.reserve(total);
    for (Index i = 0; i < total; ++i) {
      d.samples.push_back(draw_diffused_delta(s, members, t_max, rng));
    }
    for (Index i = 0; i < n_train; ++i) d.train.push_back(i);
    for (Index i = 0; i < n_val; ++i) d.val.push_back(n_train + i);
    for (Index i = 0; i < n_test; ++i) d.test.push_back(n_train + n_val + i);
    std::vector<bool> in_train(classes, false);
    for (Index i : d.train) in_train[d.samples[i].label] = true;
    if (std::all_of(in_train.begin(), in_train.end(), [](bool b) { return b; })) {
      d.provenance = "source-localization diffusion, rng=" + std::string(Rng::algorithm()) +
                     ", seed=" + std::to_string(rng.seed());
      return d;
    }
  }
  throw GenerationError("make_source_loc_dataset: a class stayed absent from the "
                        "training split after retries");
}

Dataset split_dataset(std::vector<Sample> samples,
                      const std::array<double, 3>& fractions, Rng& rng) {
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split_dataset: fractions must sum to 1");
  }
  if (samples.empty()) throw std::invalid_argument("split_dataset: no samples");

  Dataset d;
  d.n = samples.front().signal.size();
  int classes = 0;
  for (const Sample& sample : samples) {
    if (sample.signal.size() != d.n) {
      throw std::invalid_argument("split_dataset: inconsistent signal lengths");
    }
    classes = std::max(classes, sample.label + 1);
  }
  d.classes = classes;
  d.samples = std::move(samples);

  const Index total = static_cast<Index>(d.samples.size());
  const Index n_train = static_cast<Index>(std::llround(fractions[0] * total));
  const Index n_val = static_cast<Index>(std::llround(fractions[1] * total));
  if (n_train + n_val > total) {
    throw std::invalid_argument("split_dataset: rounded split sizes exceed sample count");
  }

  std::vector<Index> order(total);
  for (Index i = 0; i < total; ++i) order[i] = i;

  constexpr int kMaxRetries = 100;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    d.train.assign(order.begin(), order.begin() + n_train);
    d.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    d.test.assign(order.begin() + n_train + n_val, order.end());
    std::vector<bool> in_train(classes, false);
    for (Index i : d.train) in_train[d.samples[i].label] = true;
    if (std::all_of(in_train.begin(), in_train.end(), [](bool b) { return b; })) {
      d.provenance = "split_dataset, rng=" + std::string(Rng::algorithm()) +
                     ", seed=" + std::to_string(rng.seed());
      return d;
    }
  }
  throw GenerationError("split_dataset: a class stayed absent from the training "
                        "split after retries");
}

void save_dataset(const Dataset& d, const std::string& path) {
  json samples = json::array();
  for (const Sample& sample : d.samples) {
    json js;
    js["x"] = std::vector<double>(sample.signal.data(),
                                  sample.signal.data() + sample.signal.size());
    js["label"] = sample.label;
    if (sample.meta) {
      js["meta"] = json{{"source", sample.meta->source}, {"t", sample.meta->t}};
    } else {
      js["meta"] = nullptr;
    }
    samples.push_back(std::move(js));
  }
  json doc;
  doc["n"] = d.n;
  doc["classes"] = d.classes;
  doc["samples"] = std::move(samples);
  doc["splits"] = json{{"train", d.train}, {"val", d.val}, {"test", d.test}};
  doc["provenance"] = d.provenance;
  std::ofstream out(path);
  if (!out) throw ParseError("save_dataset: cannot open " + path);
  out << doc.dump() << "\n";
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_dataset: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ParseError("load_dataset: " + path + ": " + e.what());
  }
  try {
    Dataset d;
    d.n = doc.at("n").get<Index>();
    d.classes = doc.at("classes").get<int>();
    if (d.n <= 0 || d.classes <= 0) {
      throw ParseError("load_dataset: 'n' and 'classes' must be positive");
    }
    for (const json& js : doc.at("samples")) {
      Sample sample;
      const auto x = js.at("x").get<std::vector<double>>();
      if (static_cast<Index>(x.size()) != d.n) {
        throw ParseError("load_dataset: sample 'x' length differs from 'n'");
      }
      sample.signal = Eigen::Map<const Vector>(x.data(), x.size());
      sample.label = js.at("label").get<int>();
      if (js.contains("meta") && !js.at("meta").is_null()) {
        const json& meta = js.at("meta");
        sample.meta = SampleMeta{meta.value("source", Index{0}), meta.value("t", 0)};
      }
      d.samples.push_back(std::move(sample));
    }
    const json& splits = doc.at("splits");
    d.train = splits.at("train").get<std::vector<Index>>();
    d.val = splits.at("val").get<std::vector<Index>>();
    d.test = splits.at("test").get<std::vector<Index>>();
    d.provenance = doc.value("provenance", "");
    validate_dataset(d);
    return d;
  } catch (const json::exception& e) {
    throw ParseError("load_dataset: " + path + ": " + e.what());
  }
}

}  // namespace gssf
