#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "docner/corpus.hpp"
#include "docner/model.hpp"
#include "docner/trainer.hpp"

using namespace docner;

namespace {

const char* kTrainText =
    "-DOCSTART- O\n"
    "\n"
    "alpha S-PER\n"
    "visited O\n"
    "acme S-ORG\n"
    "\n"
    "alpha S-PER\n"
    "returned O\n"
    "\n"
    "-DOCSTART- O\n"
    "\n"
    "acme S-ORG\n"
    "hired O\n"
    "beta S-PER\n"
    "\n"
    "beta S-PER\n"
    "accepted O\n"
    "acme S-ORG\n";

Config tiny_config() {
  Config c;
  c.word_dim = 6;
  c.char_dim = 3;
  c.char_hidden = 2;
  c.word_hidden = 4;
  c.sent_hidden = 2;
  c.unc_hidden = 2;
  c.dropout = 0.2;
  c.unc_dropout = 0.2;
  c.window = 1;
  c.sample_size = 5;
  c.mc_passes = 2;
  c.lr = 0.02;
  c.l2 = 0.0;
  c.clip_norm = 5.0;
  c.batch_sentences = 3;
  c.max_epochs = 5;
  c.patience = 10;
  c.seed = 11;
  return c;
}

struct Fixture {
  Corpus corpus;
  Vocab vocab;
  std::vector<DocumentGraph> graphs;
  Config cfg;

  explicit Fixture(const Config& c) : cfg(c) {
    corpus = parse_conll(kTrainText, {}, "train");
    vocab = Vocab::build(corpus);
    apply_vocab(corpus, vocab);
    graphs = build_graphs(corpus, cfg.sample_size, cfg.seed);
  }
};

std::string fresh_dir(const std::string& name) {
  std::string dir = "/tmp/" + name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("gradient clipping scales to the norm budget and reports pre norm") {
  Config cfg = tiny_config();
  Fixture fx(cfg);
  Model model(cfg, fx.vocab);
  Trainer trainer(model, cfg);

  model.params().zero_grad();
  Var w = model.params().get("crf.W");
  Var b = model.params().get("crf.b");
  w.grad() = Mat::Constant(w.value().rows(), w.value().cols(), 2.0);
  b.grad() = Mat::Constant(b.value().rows(), b.value().cols(), -1.0);
  double expected =
      std::sqrt(4.0 * double(w.value().size()) + 1.0 * double(b.value().size()));
  REQUIRE(expected > cfg.clip_norm);

  double reported = trainer.clip_gradients();
  CHECK(reported == doctest::Approx(expected).epsilon(1e-12));
  double scale = cfg.clip_norm / expected;
  CHECK(w.grad()(0, 0) == doctest::Approx(2.0 * scale).epsilon(1e-12));
  CHECK(b.grad()(0, 0) == doctest::Approx(-1.0 * scale).epsilon(1e-12));
  CHECK(model.params().grad_norm() ==
        doctest::Approx(cfg.clip_norm).epsilon(1e-9));

  // under the budget nothing moves
  model.params().zero_grad();
  b.grad() = Mat::Constant(b.value().rows(), b.value().cols(), 1e-3);
  double small = trainer.clip_gradients();
  CHECK(small == doctest::Approx(1e-3 * std::sqrt(double(b.value().size()))));
  CHECK(b.grad()(0, 0) == 1e-3);
}

TEST_CASE("a step applies lr, weight decay, then clears gradients") {
  Config cfg = tiny_config();
  cfg.lr = 0.1;
  cfg.l2 = 0.01;
  Fixture fx(cfg);
  Model model(cfg, fx.vocab);
  Trainer trainer(model, cfg);

  model.params().zero_grad();
  Var b = model.params().get("crf.b");
  Mat v0 = b.value();
  Mat g = Mat::Constant(b.value().rows(), b.value().cols(), 0.5);
  b.grad() = g;  // norm below the clip budget

  trainer.step();
  Mat expect = v0 - cfg.lr * (g + cfg.l2 * v0);
  CHECK((b.value() - expect).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(model.params().grad_norm() == 0.0);
}

TEST_CASE("training drives the loss down and logs every epoch") {
  Config cfg = tiny_config();
  Fixture fx(cfg);
  Model model(cfg, fx.vocab);
  Trainer trainer(model, cfg);
  int callbacks = 0;
  trainer.on_epoch = [&](const EpochRow&) { ++callbacks; };

  std::string dir = fresh_dir("docner_train_smoke");
  TrainResult res =
      trainer.train(fx.corpus, fx.graphs, fx.corpus, fx.graphs, dir);

  CHECK(res.epochs_run == cfg.max_epochs);
  CHECK(int(res.rows.size()) == res.epochs_run);
  CHECK(callbacks == res.epochs_run);
  for (const EpochRow& row : res.rows) {
    CHECK(std::isfinite(row.train_loss));
    CHECK(row.dev_f1 >= 0.0);
    CHECK(row.dev_f1 <= 1.0);
  }
  CHECK(res.rows.back().train_loss < res.rows.front().train_loss);

  double best = 0.0;
  for (const EpochRow& row : res.rows) best = std::max(best, row.dev_f1);
  CHECK(res.best_dev_f1 == doctest::Approx(best));
  CHECK(res.best_epoch >= 1);
  CHECK(res.best_epoch <= res.epochs_run);

  std::ifstream metrics(dir + "/metrics.tsv");
  REQUIRE(metrics.good());
  std::string line;
  std::getline(metrics, line);
  CHECK(line == "epoch\ttrain_loss\tdev_p\tdev_r\tdev_f1");
  int data_lines = 0;
  while (std::getline(metrics, line)) {
    if (!line.empty()) ++data_lines;
  }
  CHECK(data_lines == res.epochs_run);
  CHECK(std::filesystem::exists(res.checkpoint_path));
}

TEST_CASE("early stopping waits out the patience then stops") {
  Config cfg = tiny_config();
  cfg.lr = 1e-12;  // updates too small to flip any decision
  cfg.max_epochs = 50;
  cfg.patience = 1;
  Fixture fx(cfg);
  Model model(cfg, fx.vocab);
  Trainer trainer(model, cfg);
  std::string dir = fresh_dir("docner_train_patience");
  TrainResult res =
      trainer.train(fx.corpus, fx.graphs, fx.corpus, fx.graphs, dir);
  CHECK(res.epochs_run == 2);
  CHECK(res.best_epoch == 1);
}

TEST_CASE("the saved checkpoint reproduces the best dev score") {
  Config cfg = tiny_config();
  Fixture fx(cfg);
  Model model(cfg, fx.vocab);
  Trainer trainer(model, cfg);
  std::string dir = fresh_dir("docner_train_ckpt");
  TrainResult res =
      trainer.train(fx.corpus, fx.graphs, fx.corpus, fx.graphs, dir);

  Model reloaded = Model::load(res.checkpoint_path);
  std::vector<DocumentGraph> graphs = build_graphs(
      fx.corpus, reloaded.config().sample_size, reloaded.config().seed);
  EvalResult ev = evaluate_model(reloaded, fx.corpus, graphs);
  CHECK(ev.overall.f1() == doctest::Approx(res.best_dev_f1).epsilon(1e-12));
}

TEST_CASE("identical seeds give identical training runs") {
  Config cfg = tiny_config();
  cfg.max_epochs = 3;
  Fixture fx(cfg);

  Model m1(cfg, fx.vocab);
  Model m2(cfg, fx.vocab);
  Trainer t1(m1, cfg), t2(m2, cfg);
  TrainResult r1 = t1.train(fx.corpus, fx.graphs, fx.corpus, fx.graphs,
                            fresh_dir("docner_train_det_a"));
  TrainResult r2 = t2.train(fx.corpus, fx.graphs, fx.corpus, fx.graphs,
                            fresh_dir("docner_train_det_b"));

  REQUIRE(r1.rows.size() == r2.rows.size());
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    CHECK(r1.rows[i].train_loss == r2.rows[i].train_loss);
    CHECK(r1.rows[i].dev_f1 == r2.rows[i].dev_f1);
  }
  CHECK(r1.best_dev_f1 == r2.best_dev_f1);
  CHECK(r1.best_epoch == r2.best_epoch);
}
