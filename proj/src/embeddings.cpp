#include "docner/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "docner/error.hpp"

namespace docner {

namespace {

std::string lower_copy(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

void fill_random_row(Mat& rows, Eigen::Index r, int dim, RngStream& rng) {
  double limit = std::sqrt(3.0 / dim);
  for (int c = 0; c < dim; ++c) {
    rows(r, c) = rng.uniform(-limit, limit);
  }
}

}  // namespace

EmbeddingTable random_embeddings(const Vocab& vocab, int dim, RngStream& rng) {
  EmbeddingTable t;
  t.rows = Mat::Zero(vocab.num_words(), dim);
  t.pretrained.assign(vocab.num_words(), false);
  for (int w = 0; w < vocab.num_words(); ++w) {
    fill_random_row(t.rows, w, dim, rng);
  }
  t.rows.row(Vocab::kPadWord).setZero();
  return t;
}

EmbeddingTable load_embeddings(const std::string& path, const Vocab& vocab,
                               int dim, RngStream& rng) {
  std::ifstream is(path);
  if (!is) {
    throw ParseError("cannot open embeddings: " + path);
  }

  std::map<std::string, int> exact;
  std::map<std::string, std::vector<int>> by_lower;  // missing-word fallback
  for (int w = 2; w < vocab.num_words(); ++w) {
    exact[vocab.words()[w]] = w;
    by_lower[lower_copy(vocab.words()[w])].push_back(w);
  }

  EmbeddingTable t;
  t.rows = Mat::Zero(vocab.num_words(), dim);
  t.pretrained.assign(vocab.num_words(), false);
  Mat lower_hit = Mat::Zero(vocab.num_words(), dim);
  std::vector<bool> has_lower(vocab.num_words(), false);

  std::string line;
  std::size_t line_no = 0;
  std::vector<double> vals;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    vals.clear();
    double v;
    while (ls >> v) {
      vals.push_back(v);
    }
    if (static_cast<int>(vals.size()) != dim) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(dim) + " values, got " +
                       std::to_string(vals.size()));
    }
    auto e = exact.find(token);
    if (e != exact.end() && !t.pretrained[e->second]) {
      for (int c = 0; c < dim; ++c) {
        t.rows(e->second, c) = vals[c];
      }
      t.pretrained[e->second] = true;
    }
    auto l = by_lower.find(token);
    if (l != by_lower.end()) {
      for (int w : l->second) {
        if (!has_lower[w]) {
          for (int c = 0; c < dim; ++c) {
            lower_hit(w, c) = vals[c];
          }
          has_lower[w] = true;
        }
      }
    }
  }

  int covered = 0;
  for (int w = 2; w < vocab.num_words(); ++w) {
    if (t.pretrained[w]) {
      ++covered;
    } else if (has_lower[w]) {
      t.rows.row(w) = lower_hit.row(w);
      t.pretrained[w] = true;
      ++covered;
    } else {
      fill_random_row(t.rows, w, dim, rng);
    }
  }
  fill_random_row(t.rows, Vocab::kUnkWord, dim, rng);
  int real_words = vocab.num_words() - 2;
  t.coverage = real_words > 0 ? static_cast<double>(covered) / real_words : 0.0;
  return t;
}

}  // namespace docner
