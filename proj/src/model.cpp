#include "docner/model.hpp"

#include <limits>

#include <nlohmann/json.hpp>

#include "docner/embeddings.hpp"
#include "docner/error.hpp"

namespace docner {

std::vector<DocumentGraph> build_graphs(const Corpus& corpus, int sample_size,
                                        std::uint64_t master_seed) {
  std::vector<DocumentGraph> graphs;
  graphs.reserve(corpus.documents.size());
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    RngStream rng(stream_seed(master_seed, "sampling", d));
    graphs.push_back(build_graph(corpus.documents[d], sample_size, rng));
  }
  return graphs;
}

Model::Model(const Config& cfg, Vocab vocab, const Mat* word_init)
    : cfg_(cfg), vocab_(std::move(vocab)) {
  cfg_.validate();
  RngStream init(stream_seed(cfg_.seed, "init"));

  Mat table;
  if (word_init) {
    if (word_init->rows() != vocab_.num_words() ||
        word_init->cols() != cfg_.word_dim) {
      throw ShapeError("word table is " + std::to_string(word_init->rows()) +
                       "x" + std::to_string(word_init->cols()) + ", vocab " +
                       std::to_string(vocab_.num_words()) + " words x dim " +
                       std::to_string(cfg_.word_dim));
    }
    table = *word_init;
  } else {
    RngStream emb(stream_seed(cfg_.seed, "embed"));
    table = random_embeddings(vocab_, cfg_.word_dim, emb).rows;
  }
  word_table_ = params_.add("words.table", std::move(table));

  chars_ = CharEncoder::create(params_, vocab_.num_chars(), cfg_.char_dim,
                               cfg_.char_hidden, init);
  int wc_dim = cfg_.word_dim + 2 * cfg_.char_hidden;
  if (cfg_.use_xsent) {
    xsent_ = CrossSentence::create(params_, wc_dim, cfg_.sent_hidden,
                                   cfg_.window, init);
  }
  words_ = WordEncoder::create(params_, cfg_.token_dim(), cfg_.word_hidden,
                               cfg_.dropout, init);
  if (cfg_.use_pruning) {
    unc_ = UncertaintyModule::create(params_, cfg_.token_dim(),
                                     cfg_.unc_hidden, vocab_.num_tags(),
                                     cfg_.unc_dropout, init);
  }
  if (cfg_.use_graph) {
    graph_ = GraphLayer::create(params_, cfg_.hidden_dim(),
                                cfg_.use_edge_weights, init);
  }
  crf_ = Crf::create(params_, vocab_.num_tags(), cfg_.hidden_dim(), init);
  dropout_rng_ = RngStream(stream_seed(cfg_.seed, "dropout"));
  if (cfg_.constrained_decode) {
    build_decode_masks();
  }
}

void Model::build_decode_masks() {
  int C = vocab_.num_tags();
  double neg = -std::numeric_limits<double>::infinity();
  transition_mask_ = Mat::Zero(C + 1, C);
  final_mask_ = Eigen::VectorXd::Zero(C);
  auto part = [&](int id) { return parse_tag(vocab_.tag_name(id)); };
  for (int y = 0; y < C; ++y) {
    TagParts to = part(y);
    // start of sentence: only O, B-, S- may open
    if (to.prefix == 'I' || to.prefix == 'E') {
      transition_mask_(C, y) = neg;
    }
    // unfinished span cannot end the sentence
    if (to.prefix == 'B' || to.prefix == 'I') {
      final_mask_(y) = neg;
    }
    for (int yp = 0; yp < C; ++yp) {
      TagParts from = part(yp);
      bool open = from.prefix == 'B' || from.prefix == 'I';
      bool ok;
      if (open) {
        // inside a span: must continue it with the same type
        ok = (to.prefix == 'I' || to.prefix == 'E') && to.type == from.type;
      } else {
        // outside: anything that opens or stays outside
        ok = to.prefix == 'O' || to.prefix == 'B' || to.prefix == 'S';
      }
      if (!ok) {
        transition_mask_(yp, y) = neg;
      }
    }
  }
}

Model::DocResult Model::forward_document(const Document& doc,
                                         const DocumentGraph& graph,
                                         std::size_t doc_index, bool train,
                                         std::uint64_t salt) {
  if (graph.doc_size != static_cast<int>(doc.token_count())) {
    throw DataError("graph built for " + std::to_string(graph.doc_size) +
                    " tokens, document " + doc.id + " has " +
                    std::to_string(doc.token_count()));
  }
  int nsent = static_cast<int>(doc.sentences.size());
  if (nsent == 0) {
    throw DataError("empty document: " + doc.id);
  }

  // word + char representation per token
  std::vector<std::vector<Var>> wc(nsent);
  for (int s = 0; s < nsent; ++s) {
    const Sentence& sent = doc.sentences[s];
    wc[s].reserve(sent.size());
    for (const Token& tok : sent.tokens) {
      Var w = lookup_row(word_table_, tok.word_id);
      Var c = chars_.encode(tok.char_ids);
      wc[s].push_back(vcat({w, c}));
    }
  }

  // fused sentence vector, broadcast to the sentence's tokens
  std::vector<std::vector<Var>> xs(nsent);
  for (int s = 0; s < nsent; ++s) {
    if (cfg_.use_xsent) {
      Var fused = xsent_.fuse_sentence(wc, s).fused;
      for (const Var& t : wc[s]) {
        xs[s].push_back(vcat({t, fused}));
      }
    } else {
      xs[s] = wc[s];
    }
  }

  // sentence-level context encoder
  std::vector<std::vector<Var>> per_sentence(nsent);
  std::vector<Var> H;  // whole document, doc_position order
  H.reserve(doc.token_count());
  for (int s = 0; s < nsent; ++s) {
    per_sentence[s] = words_.encode_sentence(xs[s], train, dropout_rng_);
    for (const Var& h : per_sentence[s]) {
      H.push_back(h);
    }
  }

  DocResult out;
  out.uncertainty.threshold = cfg_.threshold;
  out.uncertainty.passes = cfg_.mc_passes;
  out.loss_unc = constant(0.0);
  out.loss_aux = constant(0.0);

  // uncertainty pass over detached inputs
  if (cfg_.use_pruning) {
    std::vector<Var> unc_terms;
    int pos = 0;
    for (int s = 0; s < nsent; ++s) {
      std::vector<Var> detached;
      detached.reserve(xs[s].size());
      for (const Var& x : xs[s]) {
        detached.push_back(detach(x));
      }
      RngStream mc(stream_seed(cfg_.seed, "mc", doc_index,
                               salt * 0x9e3779b97f4a7c15ull +
                                   static_cast<std::uint64_t>(s)));
      auto res = unc_.mc_predict(detached, cfg_.mc_passes, mc);
      std::vector<int> gold;
      gold.reserve(doc.sentences[s].size());
      for (const Token& tok : doc.sentences[s].tokens) {
        gold.push_back(tok.tag_id);
      }
      unc_terms.push_back(unc_.loss(res, gold));
      for (std::size_t i = 0; i < res.entropy.size(); ++i) {
        out.uncertainty.p.push_back(res.p[i].value().col(0));
        out.uncertainty.entropy.push_back(res.entropy[i]);
        if (res.entropy[i] > cfg_.threshold) {
          out.uncertainty.drop.insert(pos);
        }
        ++pos;
      }
    }
    out.loss_unc = add_n(unc_terms);
  }

  // graph layer over the whole document
  out.pre_graph = H;
  std::vector<Var> Hhat = H;
  if (cfg_.use_graph && !graph.nodes.empty()) {
    EdgeScores scores;
    if (cfg_.use_edge_weights) {
      scores = graph_.score_edges(H, graph);
      std::vector<std::string> cats = gold_categories(doc);
      if (cfg_.aux_full_neighbors) {
        EdgeScores full;
        for (const auto& [i, adj] : graph.neighbors) {
          for (int j : adj) {
            auto it = scores.find({i, j});
            full.emplace(EdgeKey{i, j},
                         it != scores.end()
                             ? it->second
                             : graph_.relation_score(H[i], H[j]));
          }
        }
        DocumentGraph all = graph;
        all.sampled = all.neighbors;
        out.loss_aux = auxiliary_loss(all, full, cats);
      } else {
        out.loss_aux = auxiliary_loss(graph, scores, cats);
      }
    } else {
      // unweighted aggregation: every edge carries weight 1
      Var one = constant(1.0);
      for (const auto& [i, sampled] : graph.sampled) {
        for (int j : sampled) {
          scores.emplace(EdgeKey{i, j}, one);
        }
      }
    }
    for (int i : graph.nodes) {
      Var a = graph_.aggregate(i, H, graph, out.uncertainty.drop, scores);
      Hhat[i] = graph_.gated_update(H[i], a);
    }
  }

  // per-sentence tag decoding loss
  std::vector<Var> main_terms;
  int pos = 0;
  for (int s = 0; s < nsent; ++s) {
    int len = static_cast<int>(doc.sentences[s].size());
    std::vector<int> gold;
    gold.reserve(len);
    for (const Token& tok : doc.sentences[s].tokens) {
      if (tok.tag_id < 0) {
        throw DataError("token without tag id in " + doc.id +
                        " (vocab not applied?)");
      }
      gold.push_back(tok.tag_id);
    }
    std::span<const Var> slice(&Hhat[pos], static_cast<std::size_t>(len));
    main_terms.push_back(crf_.nll(slice, gold));
    out.hidden.emplace_back(Hhat.begin() + pos, Hhat.begin() + pos + len);
    pos += len;
  }
  out.loss_main = add_n(main_terms);
  out.loss_total = add(out.loss_main,
                       add(scale(out.loss_aux, cfg_.theta),
                           scale(out.loss_unc, cfg_.unc_weight)));
  return out;
}

std::vector<std::vector<int>> Model::predict(const Document& doc,
                                             const DocumentGraph& graph,
                                             std::size_t doc_index,
                                             UncertaintyReport* uncertainty) {
  DocResult res = forward_document(doc, graph, doc_index, /*train=*/false);
  if (uncertainty) {
    *uncertainty = res.uncertainty;
  }
  std::vector<std::vector<int>> tags;
  tags.reserve(res.hidden.size());
  const Mat* tmask = cfg_.constrained_decode ? &transition_mask_ : nullptr;
  const Eigen::VectorXd* fmask =
      cfg_.constrained_decode ? &final_mask_ : nullptr;
  for (const auto& sentence : res.hidden) {
    std::vector<Mat> scores;
    scores.reserve(sentence.size());
    for (const Var& h : sentence) {
      scores.push_back(crf_.scores_value(h.value()));
    }
    tags.push_back(crf_.viterbi_scores(scores, tmask, fmask));
  }
  return tags;
}

void Model::save(const std::string& path) const {
  nlohmann::json meta;
  meta["config"] = config_to_json(cfg_);
  meta["config_hash"] = config_hash(cfg_);
  meta["vocab"] = vocab_.to_json();
  save_checkpoint(path, params_, meta);
}

Model Model::load(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  Config cfg = config_from_json(ck.meta.at("config"));
  Vocab vocab = Vocab::from_json(ck.meta.at("vocab"));
  Model model(cfg, std::move(vocab));
  model.params_.load_values(ck.values);
  return model;
}

}  // namespace docner
