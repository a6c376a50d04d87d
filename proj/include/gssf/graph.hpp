#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gssf/types.hpp"

namespace gssf {

struct Graph {
  Index n = 0;
  Matrix adjacency;  // n x n, symmetric when undirected, zero diagonal unless
                     // self-loops were explicitly supplied
  std::optional<std::vector<int>> communities;
  bool directed = false;

  int community_count() const;
};

enum class Normalization { None, BySpectralRadius };

struct ShiftOperator {
  Matrix matrix;
  Normalization normalization = Normalization::None;
  double spectral_radius_estimate = 0.0;  // of the stored matrix
};

// Wraps a raw matrix as an unnormalized shift operator (estimate computed).
ShiftOperator make_shift(Matrix m);

// Undirected SBM with `c` equal-size communities on `n` nodes; intra/inter
// edge probabilities p and q. Redrawn until connected (at most 100 draws).
Graph sbm_generate(Index n, int c, double p, double q, Rng& rng);

// S = A / spectral_radius(A). Requires a connected graph.
ShiftOperator normalize_shift(const Graph& g);

// Relabels nodes: node i becomes perm[i]. adjacency' = P A P^T.
Graph permute_graph(const Graph& g, const std::vector<Index>& perm);

// Breadth-first reachability over the undirected skeleton.
bool is_connected(const Graph& g);

// Flat JSON document {"n", "directed", "edges": [[i, j, w], ...],
// "communities": [...] | null}; the writer adds a "provenance" string and the
// loader tolerates unknown keys. Loader validates the Graph invariants.
void save_graph(const Graph& g, const std::string& path,
                const std::string& provenance = "");
Graph load_graph(const std::string& path);

}  // namespace gssf
