#pragma once

#include <string>

#include "docner/corpus.hpp"
#include "docner/tensor.hpp"

namespace docner {

struct EmbeddingTable {
  Mat rows;                      // num_words x dim
  std::vector<bool> pretrained;  // per row
  double coverage = 0.0;         // pretrained fraction, PAD/UNK excluded
};

// Text format: token then dim floats per line. Vocab words not in the file
// fall back to the file entry for their lowercase form, then to uniform
// +/- sqrt(3/dim).
EmbeddingTable load_embeddings(const std::string& path, const Vocab& vocab,
                               int dim, RngStream& rng);

// All rows random, same fallback distribution.
EmbeddingTable random_embeddings(const Vocab& vocab, int dim, RngStream& rng);

}  // namespace docner
