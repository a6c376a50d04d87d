#include "gssf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <stdexcept>

#include "json.hpp"

#include "gssf/errors.hpp"
#include "gssf/numerics.hpp"

namespace gssf {

using nlohmann::json;

int Graph::community_count() const {
  if (!communities) return 0;
  int c = 0;
  for (int label : *communities) c = std::max(c, label + 1);
  return c;
}

ShiftOperator make_shift(Matrix m) {
  ShiftOperator s;
  s.spectral_radius_estimate = spectral_radius(m);
  s.matrix = std::move(m);
  s.normalization = Normalization::None;
  return s;
}

namespace {

Graph sbm_draw(Index n, int c, double p, double q, Rng& rng) {
  Graph g;
  g.n = n;
  g.adjacency = Matrix::Zero(n, n);
  g.directed = false;
  const Index block = n / c;
  std::vector<int> labels(n);
  for (Index i = 0; i < n; ++i) labels[i] = static_cast<int>(i / block);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double prob = labels[i] == labels[j] ? p : q;
      if (rng.bernoulli(prob)) {
        g.adjacency(i, j) = 1.0;
        g.adjacency(j, i) = 1.0;
      }
    }
  }
  g.communities = std::move(labels);
  return g;
}

}  // namespace

Graph sbm_generate(Index n, int c, double p, double q, Rng& rng) {
  if (c <= 0 || n <= 0 || n % c != 0) {
    throw std::invalid_argument("sbm_generate: community count must divide node count");
  }
  if (!(0.0 <= q && q <= p && p <= 1.0)) {
    throw std::invalid_argument("sbm_generate: need 0 <= q <= p <= 1");
  }
  constexpr int kMaxDraws = 100;
  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    Graph g = sbm_draw(n, c, p, q, rng);
    if (is_connected(g)) return g;
  }
  throw GenerationError("sbm_generate: " + std::to_string(kMaxDraws) +
                        " consecutive disconnected draws; parameters too sparse");
}

ShiftOperator normalize_shift(const Graph& g) {
  if (!is_connected(g)) {
    throw std::invalid_argument("normalize_shift: graph must be connected");
  }
  const double rho = spectral_radius(g.adjacency);
  if (rho < 1e-12) {
    throw std::invalid_argument("normalize_shift: spectral radius below 1e-12 (empty graph)");
  }
  ShiftOperator s;
  s.matrix = g.adjacency / rho;
  s.normalization = Normalization::BySpectralRadius;
  s.spectral_radius_estimate = spectral_radius(s.matrix);
  return s;
}

Graph permute_graph(const Graph& g, const std::vector<Index>& perm) {
  if (static_cast<Index>(perm.size()) != g.n) {
    throw std::invalid_argument("permute_graph: permutation length mismatch");
  }
  std::vector<bool> seen(g.n, false);
  for (Index p : perm) {
    if (p < 0 || p >= g.n || seen[p]) {
      throw std::invalid_argument("permute_graph: not a bijection on 0..n-1");
    }
    seen[p] = true;
  }
  Graph out;
  out.n = g.n;
  out.directed = g.directed;
  out.adjacency = Matrix::Zero(g.n, g.n);
  for (Index i = 0; i < g.n; ++i) {
    for (Index j = 0; j < g.n; ++j) {
      out.adjacency(perm[i], perm[j]) = g.adjacency(i, j);
    }
  }
  if (g.communities) {
    std::vector<int> comms(g.n);
    for (Index i = 0; i < g.n; ++i) comms[perm[i]] = (*g.communities)[i];
    out.communities = std::move(comms);
  }
  return out;
}

bool is_connected(const Graph& g) {
  if (g.n == 0) return false;
  std::vector<bool> visited(g.n, false);
  std::queue<Index> frontier;
  frontier.push(0);
  visited[0] = true;
  Index count = 1;
  while (!frontier.empty()) {
    const Index u = frontier.front();
    frontier.pop();
    for (Index v = 0; v < g.n; ++v) {
      if (!visited[v] && (g.adjacency(u, v) != 0.0 || g.adjacency(v, u) != 0.0)) {
        visited[v] = true;
        ++count;
        frontier.push(v);
      }
    }
  }
  return count == g.n;
}

void save_graph(const Graph& g, const std::string& path, const std::string& provenance) {
  json edges = json::array();
  for (Index i = 0; i < g.n; ++i) {
    const Index j_start = g.directed ? 0 : i;  // undirected: emit each edge once
    for (Index j = j_start; j < g.n; ++j) {
      if (g.adjacency(i, j) != 0.0) {
        edges.push_back({i, j, g.adjacency(i, j)});
      }
    }
  }
  json doc;
  doc["n"] = g.n;
  doc["directed"] = g.directed;
  doc["edges"] = std::move(edges);
  if (g.communities) {
    doc["communities"] = *g.communities;
  } else {
    doc["communities"] = nullptr;
  }
  if (!provenance.empty()) doc["provenance"] = provenance;
  std::ofstream out(path);
  if (!out) throw ParseError("save_graph: cannot open " + path);
  out << doc.dump(2) << "\n";
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_graph: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ParseError("load_graph: " + path + ": " + e.what());
  }
  if (!doc.contains("n") || !doc["n"].is_number_integer()) {
    throw ParseError("load_graph: missing integer field 'n'");
  }
  Graph g;
  g.n = doc["n"].get<Index>();
  if (g.n <= 0) throw ParseError("load_graph: 'n' must be positive");
  if (!doc.contains("directed") || !doc["directed"].is_boolean()) {
    throw ParseError("load_graph: missing boolean field 'directed'");
  }
  g.directed = doc["directed"].get<bool>();
  g.adjacency = Matrix::Zero(g.n, g.n);
  if (!doc.contains("edges") || !doc["edges"].is_array()) {
    throw ParseError("load_graph: missing array field 'edges'");
  }
  for (const auto& e : doc["edges"]) {
    if (!e.is_array() || e.size() != 3) {
      throw ParseError("load_graph: each edge must be [i, j, weight]");
    }
    const Index i = e[0].get<Index>();
    const Index j = e[1].get<Index>();
    const double w = e[2].get<double>();
    if (i < 0 || i >= g.n || j < 0 || j >= g.n) {
      throw ParseError("load_graph: edge endpoint out of range in 'edges'");
    }
    if (!std::isfinite(w)) throw ParseError("load_graph: non-finite edge weight");
    g.adjacency(i, j) = w;
    if (!g.directed) g.adjacency(j, i) = w;
  }
  if (doc.contains("communities") && !doc["communities"].is_null()) {
    const auto& arr = doc["communities"];
    if (!arr.is_array() || static_cast<Index>(arr.size()) != g.n) {
      throw ParseError("load_graph: 'communities' must be null or length-n array");
    }
    std::vector<int> comms;
    comms.reserve(g.n);
    for (const auto& v : arr) {
      const int label = v.get<int>();
      if (label < 0) throw ParseError("load_graph: negative community label");
      comms.push_back(label);
    }
    g.communities = std::move(comms);
  }
  return g;
}

}  // namespace gssf
