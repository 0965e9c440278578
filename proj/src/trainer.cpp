#include "docner/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "docner/error.hpp"

namespace docner {

EvalResult evaluate_model(Model& model, const Corpus& corpus,
                          const std::vector<DocumentGraph>& graphs) {
  EvalResult result;
  const Vocab& vocab = model.vocab();
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const Document& doc = corpus.documents[d];
    std::vector<std::vector<int>> pred = model.predict(doc, graphs[d], d);
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      std::vector<std::string> gold_tags, pred_tags;
      for (const Token& tok : doc.sentences[s].tokens) {
        gold_tags.push_back(tok.tag);
      }
      for (int id : pred[s]) {
        pred_tags.push_back(vocab.tag_name(id));
      }
      accumulate_sentence(result, gold_tags, pred_tags);
    }
  }
  return result;
}

double Trainer::clip_gradients() {
  ParamRegistry& params = model_.params();
  double norm = params.grad_norm();
  if (norm > cfg_.clip_norm && norm > 0.0) {
    double s = cfg_.clip_norm / norm;
    for (const Parameter& p : params.all()) {
      Var v = p.var;
      if (v.grad().size() > 0) {
        v.grad() *= s;
      }
    }
  }
  return norm;
}

void Trainer::step() {
  clip_gradients();
  for (const Parameter& p : model_.params().all()) {
    Var v = p.var;
    Mat g = v.grad().size() > 0 ? v.grad()
                                : Mat::Zero(v.rows(), v.cols());
    g += cfg_.l2 * v.value();
    v.value() -= cfg_.lr * g;
  }
  model_.params().zero_grad();
}

TrainResult Trainer::train(const Corpus& train_corpus,
                           const std::vector<DocumentGraph>& train_graphs,
                           const Corpus& dev_corpus,
                           const std::vector<DocumentGraph>& dev_graphs,
                           const std::string& out_dir) {
  if (train_corpus.documents.empty()) {
    throw DataError("training corpus has no documents");
  }
  if (train_graphs.size() != train_corpus.documents.size() ||
      dev_graphs.size() != dev_corpus.documents.size()) {
    throw DataError("graph list does not match corpus");
  }

  TrainResult result;
  result.checkpoint_path = out_dir + "/model.ckpt";
  std::ofstream metrics(out_dir + "/metrics.tsv");
  if (!metrics) {
    throw ParseError("cannot write metrics under " + out_dir);
  }
  metrics << "epoch\ttrain_loss\tdev_p\tdev_r\tdev_f1\n";

  double best = -1.0;
  int since_best = 0;
  std::vector<std::size_t> order(train_corpus.documents.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg_.max_epochs; ++epoch) {
    RngStream shuffle_rng(stream_seed(cfg_.seed, "shuffle",
                                      static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    int batch_sentences = 0;
    bool pending = false;
    for (std::size_t idx : order) {
      const Document& doc = train_corpus.documents[idx];
      Model::DocResult res = model_.forward_document(
          doc, train_graphs[idx], idx, /*train=*/true,
          static_cast<std::uint64_t>(epoch));
      double loss = res.loss_total.value()(0, 0);
      backward(res.loss_total);
      if (!std::isfinite(loss)) {
        std::string culprit = model_.params().first_nonfinite_grad();
        throw NumericError(
            "non-finite loss on document " + doc.id +
            (culprit.empty() ? "" : "; first non-finite gradient: " + culprit));
      }
      epoch_loss += loss;
      pending = true;
      batch_sentences += static_cast<int>(doc.sentences.size());
      if (batch_sentences >= cfg_.batch_sentences) {
        step();
        batch_sentences = 0;
        pending = false;
      }
    }
    if (pending) {
      step();
    }

    EvalResult dev = evaluate_model(model_, dev_corpus, dev_graphs);
    EpochRow row;
    row.epoch = epoch;
    row.train_loss = epoch_loss / train_corpus.documents.size();
    row.dev_p = dev.overall.precision();
    row.dev_r = dev.overall.recall();
    row.dev_f1 = dev.overall.f1();
    result.rows.push_back(row);
    result.epochs_run = epoch;
    metrics << row.epoch << "\t" << row.train_loss << "\t" << row.dev_p
            << "\t" << row.dev_r << "\t" << row.dev_f1 << "\n";
    metrics.flush();
    if (on_epoch) {
      on_epoch(row);
    }

    if (row.dev_f1 > best) {
      best = row.dev_f1;
      result.best_dev_f1 = row.dev_f1;
      result.best_epoch = epoch;
      since_best = 0;
      model_.save(result.checkpoint_path);
    } else {
      ++since_best;
    }
    if (since_best >= cfg_.patience) {
      break;
    }
  }

  nlohmann::json summary;
  summary["best_dev_f1"] = result.best_dev_f1;
  summary["best_epoch"] = result.best_epoch;
  summary["epochs_run"] = result.epochs_run;
  summary["checkpoint"] = result.checkpoint_path;
  auto rows = nlohmann::json::array();
  for (const EpochRow& r : result.rows) {
    rows.push_back({{"epoch", r.epoch},
                    {"train_loss", r.train_loss},
                    {"dev_p", r.dev_p},
                    {"dev_r", r.dev_r},
                    {"dev_f1", r.dev_f1}});
  }
  summary["epochs"] = rows;
  std::ofstream js(out_dir + "/metrics.json");
  js << summary.dump(2) << "\n";
  return result;
}

}  // namespace docner
