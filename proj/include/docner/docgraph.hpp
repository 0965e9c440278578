#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "docner/corpus.hpp"
#include "docner/params.hpp"
#include "docner/tensor.hpp"

namespace docner {

// Undirected graph over one document's token positions: every two positions
// sharing a lowercase surface are connected. Positions with no repeats are
// not nodes. Each node also carries a fixed uniform sample (without
// replacement) of at most `sample_size` neighbors, drawn once at build time.
struct DocumentGraph {
  int doc_size = 0;
  int sample_size = 0;
  std::vector<int> nodes;                    // ascending doc_positions
  std::map<int, std::vector<int>> neighbors; // full adjacency, ascending
  std::map<int, std::vector<int>> sampled;   // ascending subset per node

  bool is_node(int pos) const { return neighbors.count(pos) > 0; }
  std::size_t edge_count() const;  // undirected, full adjacency
};

DocumentGraph build_graph(const Document& doc, int sample_size,
                          RngStream& rng);

using EdgeKey = std::pair<int, int>;  // ordered (i, j)
using EdgeScores = std::map<EdgeKey, Var>;

// Aggregation, gating, and the edge classifier over document hidden states.
struct GraphLayer {
  Var W_a, b_a;              // neighbor transform
  Var W_z, U_z;              // update gate
  Var W_r, U_r;              // reset gate
  Var W_o, U_o;              // candidate state
  Var W_c, b_c;              // edge classifier, W_c is 1 x 2d
  bool has_classifier = false;
  Eigen::Index dim = 0;

  static GraphLayer create(ParamRegistry& reg, Eigen::Index dim,
                           bool with_classifier, RngStream& rng);

  // sigmoid(W_c [h_i; h_j] + b_c), a 1x1 score in (0,1).
  Var relation_score(const Var& h_i, const Var& h_j) const;

  // Scores for every (i, j in sampled(i)) pair of the graph.
  EdgeScores score_edges(std::span<const Var> H,
                         const DocumentGraph& graph) const;

  // Mean of score-weighted transformed neighbors, dropped positions
  // excluded; empty support gives the zero vector.
  Var aggregate(int i, std::span<const Var> H, const DocumentGraph& graph,
                const std::set<int>& drop, const EdgeScores& scores) const;
  // Unweighted variant (every score treated as 1, nothing dropped).
  Var aggregate_plain(int i, std::span<const Var> H,
                      const DocumentGraph& graph) const;

  // GRU-style fusion of a node state with its aggregate.
  Var gated_update(const Var& h, const Var& a) const;
};

// Same-entity-category indicator for the classifier target: categories are
// gold types with the position prefix stripped, O counts as its own
// category.
std::vector<std::string> gold_categories(const Document& doc);

// Binary cross-entropy of relation scores against category agreement,
// summed over every sampled pair. Scores are clamped to [eps, 1-eps].
Var auxiliary_loss(const DocumentGraph& graph, const EdgeScores& scores,
                   const std::vector<std::string>& categories,
                   double eps = 1e-12);

struct GraphStats {
  std::string doc_id;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::map<std::size_t, std::size_t> degree_histogram;
  double label_consistency = 0.0;  // fraction of edges with equal category
};
GraphStats graph_stats(const Document& doc, const DocumentGraph& graph);

}  // namespace docner
