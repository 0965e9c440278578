#include "docner/docgraph.hpp"

#include <algorithm>

#include "docner/error.hpp"
#include "docner/tags.hpp"

namespace docner {

std::size_t DocumentGraph::edge_count() const {
  std::size_t deg = 0;
  for (const auto& [_, adj] : neighbors) {
    deg += adj.size();
  }
  return deg / 2;
}

DocumentGraph build_graph(const Document& doc, int sample_size,
                          RngStream& rng) {
  if (sample_size < 1) {
    throw DataError("graph sample size must be >= 1");
  }
  DocumentGraph g;
  g.doc_size = static_cast<int>(doc.token_count());
  g.sample_size = sample_size;

  std::map<std::string, std::vector<int>> occurrences;
  for (const auto& s : doc.sentences) {
    for (const auto& t : s.tokens) {
      occurrences[t.lowercase].push_back(t.doc_position);
    }
  }
  for (const auto& [surface, positions] : occurrences) {
    if (positions.size() < 2) {
      continue;
    }
    for (int i : positions) {
      g.nodes.push_back(i);
      std::vector<int>& adj = g.neighbors[i];
      for (int j : positions) {
        if (j != i) {
          adj.push_back(j);
        }
      }
    }
  }
  std::sort(g.nodes.begin(), g.nodes.end());
  for (const int i : g.nodes) {
    std::vector<int> pick = rng.sample(g.neighbors[i],
                                       static_cast<std::size_t>(sample_size));
    std::sort(pick.begin(), pick.end());
    g.sampled[i] = std::move(pick);
  }
  return g;
}

GraphLayer GraphLayer::create(ParamRegistry& reg, Eigen::Index dim,
                              bool with_classifier, RngStream& rng) {
  GraphLayer l;
  l.dim = dim;
  l.W_a = reg.add_glorot("graph.W_a", dim, dim, rng);
  l.b_a = reg.add_zeros("graph.b_a", dim, 1);
  l.W_z = reg.add_glorot("graph.W_z", dim, dim, rng);
  l.U_z = reg.add_glorot("graph.U_z", dim, dim, rng);
  l.W_r = reg.add_glorot("graph.W_r", dim, dim, rng);
  l.U_r = reg.add_glorot("graph.U_r", dim, dim, rng);
  l.W_o = reg.add_glorot("graph.W_o", dim, dim, rng);
  l.U_o = reg.add_glorot("graph.U_o", dim, dim, rng);
  l.has_classifier = with_classifier;
  if (with_classifier) {
    l.W_c = reg.add_glorot("graph.W_c", 1, 2 * dim, rng);
    l.b_c = reg.add_zeros("graph.b_c", 1, 1);
  }
  return l;
}

Var GraphLayer::relation_score(const Var& h_i, const Var& h_j) const {
  return sigmoid(add(matmul(W_c, vcat({h_i, h_j})), b_c));
}

EdgeScores GraphLayer::score_edges(std::span<const Var> H,
                                   const DocumentGraph& graph) const {
  EdgeScores scores;
  for (const auto& [i, sampled] : graph.sampled) {
    for (int j : sampled) {
      scores.emplace(EdgeKey{i, j}, relation_score(H[i], H[j]));
    }
  }
  return scores;
}

Var GraphLayer::aggregate(int i, std::span<const Var> H,
                          const DocumentGraph& graph,
                          const std::set<int>& drop,
                          const EdgeScores& scores) const {
  auto it = graph.sampled.find(i);
  if (it == graph.sampled.end()) {
    throw DataError("aggregate: position " + std::to_string(i) +
                    " is not a graph node");
  }
  std::vector<Var> terms;
  for (int j : it->second) {
    if (drop.count(j)) {
      continue;
    }
    terms.push_back(
        smul(scores.at({i, j}), add(matmul(W_a, H[j]), b_a)));
  }
  if (terms.empty()) {
    return constant(Mat::Zero(dim, 1));
  }
  return relu(scale(add_n(terms), 1.0 / static_cast<double>(terms.size())));
}

Var GraphLayer::aggregate_plain(int i, std::span<const Var> H,
                                const DocumentGraph& graph) const {
  auto it = graph.sampled.find(i);
  if (it == graph.sampled.end()) {
    throw DataError("aggregate: position " + std::to_string(i) +
                    " is not a graph node");
  }
  std::vector<Var> terms;
  for (int j : it->second) {
    terms.push_back(add(matmul(W_a, H[j]), b_a));
  }
  if (terms.empty()) {
    return constant(Mat::Zero(dim, 1));
  }
  return relu(scale(add_n(terms), 1.0 / static_cast<double>(terms.size())));
}

Var GraphLayer::gated_update(const Var& h, const Var& a) const {
  Var z = sigmoid(add(matmul(W_z, a), matmul(U_z, h)));
  Var r = sigmoid(add(matmul(W_r, a), matmul(U_r, h)));
  Var cand = tanh(add(matmul(W_o, a), matmul(U_o, mul(r, h))));
  Var ones = constant(Mat::Ones(h.rows(), 1));
  return add(mul(sub(ones, z), h), mul(z, cand));
}

std::vector<std::string> gold_categories(const Document& doc) {
  std::vector<std::string> cats(doc.token_count());
  for (const auto& s : doc.sentences) {
    for (const auto& t : s.tokens) {
      cats[t.doc_position] = tag_category(t.tag);
    }
  }
  return cats;
}

Var auxiliary_loss(const DocumentGraph& graph, const EdgeScores& scores,
                   const std::vector<std::string>& categories, double eps) {
  std::vector<Var> terms;
  for (const auto& [i, sampled] : graph.sampled) {
    for (int j : sampled) {
      Var r = clamp(scores.at({i, j}), eps, 1.0 - eps);
      bool same = categories[i] == categories[j];
      if (same) {
        terms.push_back(log(r));
      } else {
        terms.push_back(log(sub(constant(Mat::Ones(1, 1)), r)));
      }
    }
  }
  if (terms.empty()) {
    return constant(0.0);
  }
  return neg(add_n(terms));
}

GraphStats graph_stats(const Document& doc, const DocumentGraph& graph) {
  GraphStats st;
  st.doc_id = doc.id;
  st.node_count = graph.nodes.size();
  st.edge_count = graph.edge_count();
  std::vector<std::string> cats = gold_categories(doc);
  std::size_t consistent = 0, total = 0;
  for (const auto& [i, adj] : graph.neighbors) {
    st.degree_histogram[adj.size()] += 1;
    for (int j : adj) {
      if (j > i) {  // each undirected edge once
        ++total;
        if (cats[i] == cats[j]) {
          ++consistent;
        }
      }
    }
  }
  st.label_consistency =
      total == 0 ? 0.0 : static_cast<double>(consistent) / total;
  return st;
}

}  // namespace docner
