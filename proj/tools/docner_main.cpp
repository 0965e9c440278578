#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "docner/config.hpp"
#include "docner/corpus.hpp"
#include "docner/docgraph.hpp"
#include "docner/embeddings.hpp"
#include "docner/error.hpp"
#include "docner/gradcheck.hpp"
#include "docner/model.hpp"
#include "docner/trainer.hpp"

namespace {

using namespace docner;

void print_result(std::ostream& os, const EvalResult& r) {
  os << "set\tprecision\trecall\tf1\tgold\tpredicted\tcorrect\n";
  os << "overall\t" << r.overall.precision() << "\t" << r.overall.recall()
     << "\t" << r.overall.f1() << "\t" << r.overall.gold << "\t"
     << r.overall.predicted << "\t" << r.overall.correct << "\n";
  for (const auto& [type, prf] : r.by_type) {
    os << type << "\t" << prf.precision() << "\t" << prf.recall() << "\t"
       << prf.f1() << "\t" << prf.gold << "\t" << prf.predicted << "\t"
       << prf.correct << "\n";
  }
}

struct TrainArgs {
  std::string config, train, dev, out, embeddings;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_train(const TrainArgs& args) {
  Config cfg = load_config(args.config);
  if (args.seed_set) {
    cfg.seed = args.seed;
  }
  cfg.validate();

  Corpus train = load_conll(args.train);
  Corpus dev = load_conll(args.dev);
  Vocab vocab = Vocab::build(train);
  apply_vocab(train, vocab);
  apply_vocab(dev, vocab);
  std::cout << "train: " << train.documents.size() << " documents, "
            << train.stats.sentences << " sentences, " << train.stats.tokens
            << " tokens\n";
  std::cout << "dev: " << dev.documents.size() << " documents, "
            << dev.stats.sentences << " sentences, " << dev.stats.tokens
            << " tokens\n";
  std::cout << "vocab: " << vocab.num_words() << " words, "
            << vocab.num_chars() << " chars, " << vocab.num_tags()
            << " tags\n";

  std::unique_ptr<Model> model;
  if (!args.embeddings.empty()) {
    RngStream rng(stream_seed(cfg.seed, "embed"));
    EmbeddingTable table =
        load_embeddings(args.embeddings, vocab, cfg.word_dim, rng);
    std::cout << "embeddings: coverage " << table.coverage << "\n";
    model = std::make_unique<Model>(cfg, vocab, &table.rows);
  } else {
    model = std::make_unique<Model>(cfg, vocab);
  }
  std::cout << "parameters: " << model->params().total_elements() << "\n";

  std::vector<DocumentGraph> train_graphs =
      build_graphs(train, cfg.sample_size, cfg.seed);
  std::vector<DocumentGraph> dev_graphs =
      build_graphs(dev, cfg.sample_size, cfg.seed);

  std::filesystem::create_directories(args.out);
  Trainer trainer(*model, cfg);
  trainer.on_epoch = [](const EpochRow& row) {
    std::cout << "epoch " << row.epoch << "  loss " << row.train_loss
              << "  dev P " << row.dev_p << "  R " << row.dev_r << "  F1 "
              << row.dev_f1 << "\n";
  };
  TrainResult res =
      trainer.train(train, train_graphs, dev, dev_graphs, args.out);
  std::cout << "best dev F1 " << res.best_dev_f1 << " at epoch "
            << res.best_epoch << " (" << res.epochs_run << " epochs run)\n";
  std::cout << "checkpoint: " << res.checkpoint_path << "\n";
  return 0;
}

int run_eval(const std::string& model_path, const std::string& data_path) {
  Model model = Model::load(model_path);
  Corpus corpus = load_conll(data_path);
  apply_vocab(corpus, model.vocab());
  std::vector<DocumentGraph> graphs =
      build_graphs(corpus, model.config().sample_size, model.config().seed);
  EvalResult result = evaluate_model(model, corpus, graphs);
  print_result(std::cout, result);
  return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path, bool emit_uncertainty) {
  Model model = Model::load(model_path);
  Corpus corpus = load_conll(data_path);
  apply_vocab(corpus, model.vocab());
  std::vector<DocumentGraph> graphs =
      build_graphs(corpus, model.config().sample_size, model.config().seed);

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) {
      throw ParseError("cannot write " + out_path);
    }
  }
  std::ostream& os = out_path.empty() ? std::cout : file;

  const Vocab& vocab = model.vocab();
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const Document& doc = corpus.documents[d];
    UncertaintyReport unc;
    std::vector<std::vector<int>> pred = model.predict(doc, graphs[d], d, &unc);
    int pos = 0;
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      for (std::size_t t = 0; t < doc.sentences[s].size(); ++t, ++pos) {
        const Token& tok = doc.sentences[s].tokens[t];
        os << tok.surface << "\t" << tok.tag << "\t"
           << vocab.tag_name(pred[s][t]);
        if (emit_uncertainty) {
          os << "\t" << unc.entropy[pos] << "\t" << unc.drop.count(pos);
        }
        os << "\n";
      }
      os << "\n";
    }
  }
  return 0;
}

int run_graph_stats(const std::string& data_path, int sample_size,
                    std::uint64_t seed) {
  Corpus corpus = load_conll(data_path);
  std::vector<DocumentGraph> graphs =
      build_graphs(corpus, sample_size, seed);
  std::cout << "doc\ttokens\tnodes\tedges\tconsistency\tdegrees\n";
  std::size_t nodes = 0, edges = 0;
  double consistency_sum = 0.0;
  std::size_t consistency_weight = 0;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const Document& doc = corpus.documents[d];
    GraphStats st = graph_stats(doc, graphs[d]);
    std::cout << st.doc_id << "\t" << doc.token_count() << "\t"
              << st.node_count << "\t" << st.edge_count << "\t"
              << st.label_consistency << "\t";
    bool first = true;
    for (const auto& [deg, count] : st.degree_histogram) {
      std::cout << (first ? "" : " ") << deg << ":" << count;
      first = false;
    }
    std::cout << "\n";
    nodes += st.node_count;
    edges += st.edge_count;
    consistency_sum += st.label_consistency * st.edge_count;
    consistency_weight += st.edge_count;
  }
  std::cout << "total\t" << corpus.stats.tokens << "\t" << nodes << "\t"
            << edges << "\t"
            << (consistency_weight == 0
                    ? 0.0
                    : consistency_sum / consistency_weight)
            << "\t\n";
  return 0;
}

int run_grad_check(double tol, double h) {
  double worst = 0.0;
  std::size_t checked = 0;
  std::cout << "case\tmax_rel_err\telements\n";
  for (const OpCheck& op : check_primitive_ops(h)) {
    std::cout << op.name << "\t" << op.report.max_rel_err << "\t"
              << op.report.checked << "\n";
    worst = std::max(worst, op.report.max_rel_err);
    checked += op.report.checked;
  }
  ModelCheck model = check_toy_model(h);
  std::cout << "full_model\t" << model.report.max_rel_err << "\t"
            << model.report.checked << "\n";
  std::cout << "full model: seed " << model.seed << ", " << model.node_count
            << " graph nodes, " << model.dropped
            << " dropped, entropy margin " << model.entropy_margin
            << ", relu margin " << model.relu_margin << "\n";
  worst = std::max(worst, model.report.max_rel_err);
  checked += model.report.checked;
  std::cout << "max relative error " << worst << " over " << checked
            << " elements (tolerance " << tol << ")\n";
  if (worst > tol) {
    std::cerr << "gradient check failed: worst case " << worst << " in "
              << model.report.worst_param << "\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"document-level named entity tagger"};
  app.require_subcommand(1);

  TrainArgs targs;
  CLI::App* train = app.add_subcommand("train", "fit a model");
  train->add_option("--config", targs.config, "key=value config file")
      ->required();
  train->add_option("--train", targs.train, "training corpus")->required();
  train->add_option("--dev", targs.dev, "development corpus")->required();
  train->add_option("--out", targs.out, "output directory")->required();
  train->add_option("--embeddings", targs.embeddings,
                    "pretrained word vector file");
  CLI::Option* seed_opt =
      train->add_option("--seed", targs.seed, "override the config seed");

  std::string model_path, data_path, out_path;
  CLI::App* eval = app.add_subcommand("eval", "score a corpus");
  eval->add_option("--model", model_path, "checkpoint")->required();
  eval->add_option("--data", data_path, "labeled corpus")->required();

  std::string p_model, p_data, p_out;
  bool emit_uncertainty = false;
  CLI::App* predict = app.add_subcommand("predict", "tag a corpus");
  predict->add_option("--model", p_model, "checkpoint")->required();
  predict->add_option("--data", p_data, "corpus")->required();
  predict->add_option("--out", p_out, "output file (default stdout)");
  predict->add_flag("--emit-uncertainty", emit_uncertainty,
                    "append entropy and drop columns");

  std::string g_data;
  int g_p = 5;
  std::uint64_t g_seed = 42;
  CLI::App* gstats = app.add_subcommand("graph-stats",
                                        "document graph statistics");
  gstats->add_option("--data", g_data, "corpus")->required();
  gstats->add_option("--p", g_p, "neighbor sample size");
  gstats->add_option("--seed", g_seed, "sampling seed");

  std::string dims = "small";
  double tol = 1e-4, fd_step = 1e-4;
  CLI::App* gcheck = app.add_subcommand("grad-check",
                                        "finite-difference gradient suite");
  gcheck->add_option("--dims", dims, "preset size")
      ->check(CLI::IsMember({"small"}));
  gcheck->add_option("--tol", tol, "max relative error accepted");
  gcheck->add_option("--fd-step", fd_step, "central difference step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) {
      targs.seed_set = seed_opt->count() > 0;
      return run_train(targs);
    }
    if (eval->parsed()) {
      return run_eval(model_path, data_path);
    }
    if (predict->parsed()) {
      return run_predict(p_model, p_data, p_out, emit_uncertainty);
    }
    if (gstats->parsed()) {
      return run_graph_stats(g_data, g_p, g_seed);
    }
    if (gcheck->parsed()) {
      return run_grad_check(tol, fd_step);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
