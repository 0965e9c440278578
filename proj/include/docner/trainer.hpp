#pragma once

#include <functional>
#include <string>
#include <vector>

#include "docner/eval.hpp"
#include "docner/model.hpp"

namespace docner {

struct EpochRow {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_p = 0.0, dev_r = 0.0, dev_f1 = 0.0;
};

struct TrainResult {
  double best_dev_f1 = 0.0;
  int best_epoch = 0;
  int epochs_run = 0;
  std::string checkpoint_path;
  std::vector<EpochRow> rows;
};

// Gold vs Viterbi tags over a corpus, documents scored independently.
EvalResult evaluate_model(Model& model, const Corpus& corpus,
                          const std::vector<DocumentGraph>& graphs);

// Plain SGD over document units: losses accumulate until roughly
// batch_sentences sentences have contributed, then one clipped update.
class Trainer {
 public:
  Trainer(Model& model, const Config& cfg) : model_(model), cfg_(cfg) {}

  // Called after each epoch's dev scoring (progress reporting).
  std::function<void(const EpochRow&)> on_epoch;

  // Scales gradients so their global norm is at most clip_norm; returns the
  // pre-clip norm.
  double clip_gradients();
  // clip, add the L2 term, apply -lr * grad, zero gradients.
  void step();

  // Full loop with per-epoch document shuffle, dev scoring, early stopping,
  // best-checkpoint saving and metrics logging under out_dir.
  TrainResult train(const Corpus& train_corpus,
                    const std::vector<DocumentGraph>& train_graphs,
                    const Corpus& dev_corpus,
                    const std::vector<DocumentGraph>& dev_graphs,
                    const std::string& out_dir);

 private:
  Model& model_;
  Config cfg_;
};

}  // namespace docner
