#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace docner {

// Every knob of the model and trainer. Hidden sizes are per direction.
struct Config {
  // representation sizes
  int word_dim = 300;
  int char_dim = 30;
  int char_hidden = 50;
  int word_hidden = 200;
  int sent_hidden = 150;
  int unc_hidden = 100;

  // module toggles
  bool use_xsent = true;
  bool use_graph = true;
  bool use_edge_weights = true;  // relation-score weighting + auxiliary loss
  bool use_pruning = true;       // uncertainty module + drop set
  bool aux_full_neighbors = false;
  bool constrained_decode = false;

  // model hyperparameters
  double dropout = 0.5;
  double unc_dropout = 0.5;
  int window = 2;        // sentences of context per side
  int sample_size = 5;   // neighbors kept per graph node
  int mc_passes = 10;    // stochastic passes of the uncertainty module
  double threshold = 0.5;  // entropy cutoff for the drop set, nats
  double theta = 0.1;      // auxiliary loss weight
  double unc_weight = 1.0; // uncertainty loss weight

  // optimization
  double lr = 0.01;
  double l2 = 1e-8;
  double clip_norm = 5.0;
  int batch_sentences = 20;  // sentences' worth of documents per update
  int max_epochs = 100;
  int patience = 10;
  std::uint64_t seed = 42;

  int token_dim() const {
    int d = word_dim + 2 * char_hidden;
    return use_xsent ? d + 2 * sent_hidden : d;
  }
  int hidden_dim() const { return 2 * word_hidden; }
  int sent_dim() const { return 2 * sent_hidden; }

  void validate() const;  // throws DataError on nonsense values
};

// key=value lines, # comments, unknown keys rejected.
Config parse_config_text(const std::string& text,
                         const std::string& origin = "<memory>");
Config load_config(const std::string& path);
// Canonical text form: every field, fixed order. parse(canonical(c)) == c.
std::string canonical_config(const Config& cfg);
std::uint64_t config_hash(const Config& cfg);

nlohmann::json config_to_json(const Config& cfg);
Config config_from_json(const nlohmann::json& j);

}  // namespace docner
