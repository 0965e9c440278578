#pragma once

#include <string>
#include <vector>

#include "docner/config.hpp"
#include "docner/corpus.hpp"
#include "docner/crf.hpp"
#include "docner/docgraph.hpp"
#include "docner/encoder.hpp"
#include "docner/uncertainty.hpp"
#include "docner/xsent.hpp"

namespace docner {

// Graphs for a whole corpus, sampling seeded per document index.
std::vector<DocumentGraph> build_graphs(const Corpus& corpus, int sample_size,
                                        std::uint64_t master_seed);

// The document tagger: embeddings -> sentence-context fusion -> word-level
// encoder -> uncertainty pruning -> document graph -> per-sentence CRF.
class Model {
 public:
  // word_init: optional pretrained table (vocab rows x word_dim); without it
  // rows are drawn from the embedding fallback distribution.
  Model(const Config& cfg, Vocab vocab, const Mat* word_init = nullptr);

  struct DocResult {
    std::vector<std::vector<Var>> hidden;  // final per-sentence states
    std::vector<Var> pre_graph;  // doc_position order, before the graph layer
    Var loss_main, loss_aux, loss_unc, loss_total;
    UncertaintyReport uncertainty;
  };
  // salt separates stochastic-pass draws between epochs; evaluation uses 0
  // so a checkpoint scores a fixed corpus identically every time.
  DocResult forward_document(const Document& doc, const DocumentGraph& graph,
                             std::size_t doc_index, bool train,
                             std::uint64_t salt = 0);

  // Viterbi tags (ids) per sentence, eval mode.
  std::vector<std::vector<int>> predict(const Document& doc,
                                        const DocumentGraph& graph,
                                        std::size_t doc_index,
                                        UncertaintyReport* uncertainty =
                                            nullptr);

  ParamRegistry& params() { return params_; }
  const ParamRegistry& params() const { return params_; }
  const Config& config() const { return cfg_; }
  const Vocab& vocab() const { return vocab_; }
  const Crf& crf() const { return crf_; }
  const GraphLayer& graph_layer() const { return graph_; }
  const CrossSentence& cross_sentence() const { return xsent_; }
  const UncertaintyModule& uncertainty_module() const { return unc_; }

  // Entropy cutoff is tunable post-construction (threshold studies).
  void set_threshold(double t) { cfg_.threshold = t; }

  void save(const std::string& path) const;
  static Model load(const std::string& path);

 private:
  Config cfg_;
  Vocab vocab_;
  ParamRegistry params_;
  Var word_table_;
  CharEncoder chars_;
  CrossSentence xsent_;    // live only when use_xsent
  WordEncoder words_;
  UncertaintyModule unc_;  // live only when use_pruning
  GraphLayer graph_;       // live only when use_graph
  Crf crf_;
  RngStream dropout_rng_;
  Mat transition_mask_;            // constrained decoding
  Eigen::VectorXd final_mask_;

  void build_decode_masks();
};

}  // namespace docner
