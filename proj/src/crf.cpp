#include "docner/crf.hpp"

#include <limits>
#include <string>

#include "docner/error.hpp"

namespace docner {

Crf Crf::create(ParamRegistry& reg, int num_tags, Eigen::Index dim,
                RngStream& rng) {
  Crf crf;
  crf.num_tags = num_tags;
  crf.dim = dim;
  Eigen::Index pairs = static_cast<Eigen::Index>(num_tags + 1) * num_tags;
  crf.W = reg.add_glorot("crf.W", pairs, dim, rng);
  crf.b = reg.add_zeros("crf.b", pairs, 1);
  return crf;
}

Var Crf::scores_at(const Var& h) const {
  return reshape_rowmajor(add(matmul(W, h), b), num_tags + 1, num_tags);
}

Mat Crf::scores_value(const Mat& h) const {
  Mat flat = W.value() * h + b.value();
  Mat out(num_tags + 1, num_tags);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      out(r, c) = flat(r * num_tags + c, 0);
    }
  }
  return out;
}

namespace {
void check_tags(std::span<const int> tags, int num_tags) {
  for (int t : tags) {
    if (t < 0 || t >= num_tags) {
      throw DataError("tag index " + std::to_string(t) + " outside 0.." +
                      std::to_string(num_tags - 1));
    }
  }
}
}  // namespace

Var Crf::score_from(std::span<const Var> scores,
                    std::span<const int> tags) const {
  check_tags(tags, num_tags);
  Var total = pick(scores[0], num_tags, tags[0]);  // start row
  for (std::size_t j = 1; j < scores.size(); ++j) {
    total = add(total, pick(scores[j], tags[j - 1], tags[j]));
  }
  return total;
}

Var Crf::partition_from(std::span<const Var> scores) const {
  // alpha[y] = log sum of exp-scores over prefixes ending in tag y
  Var alpha = transpose(block(scores[0], num_tags, 0, 1, num_tags));
  for (std::size_t j = 1; j < scores.size(); ++j) {
    Var trans = block(scores[j], 0, 0, num_tags, num_tags);
    Var beams = add_col_broadcast(trans, alpha);  // [y_prev, y] joint scores
    alpha = logsumexp(transpose(beams));          // reduce over y_prev
  }
  return logsumexp(alpha);
}

Var Crf::sequence_score(std::span<const Var> H,
                        std::span<const int> tags) const {
  if (H.size() != tags.size() || H.empty()) {
    throw ShapeError("sequence_score: " + std::to_string(H.size()) +
                     " vectors vs " + std::to_string(tags.size()) + " tags");
  }
  std::vector<Var> scores;
  scores.reserve(H.size());
  for (const Var& h : H) {
    scores.push_back(scores_at(h));
  }
  return score_from(scores, tags);
}

Var Crf::log_partition(std::span<const Var> H) const {
  if (H.empty()) {
    throw ShapeError("log_partition: empty sequence");
  }
  std::vector<Var> scores;
  scores.reserve(H.size());
  for (const Var& h : H) {
    scores.push_back(scores_at(h));
  }
  return partition_from(scores);
}

Var Crf::nll(std::span<const Var> H, std::span<const int> tags) const {
  if (H.size() != tags.size() || H.empty()) {
    throw ShapeError("nll: " + std::to_string(H.size()) + " vectors vs " +
                     std::to_string(tags.size()) + " tags");
  }
  std::vector<Var> scores;
  scores.reserve(H.size());
  for (const Var& h : H) {
    scores.push_back(scores_at(h));
  }
  return sub(partition_from(scores), score_from(scores, tags));
}

std::vector<int> Crf::viterbi(std::span<const Var> H) const {
  std::vector<Mat> scores;
  scores.reserve(H.size());
  for (const Var& h : H) {
    scores.push_back(scores_value(h.value()));
  }
  return viterbi_scores(scores);
}

std::vector<int> Crf::viterbi_scores(const std::vector<Mat>& scores,
                                     const Mat* transition_mask,
                                     const Eigen::VectorXd* final_mask) const {
  int C = num_tags;
  int n = static_cast<int>(scores.size());
  if (n == 0) {
    return {};
  }
  auto masked = [&](int j, int yp, int y) {
    double v = scores[j](yp, y);
    if (transition_mask) {
      v += (*transition_mask)(yp, y);
    }
    return v;
  };

  Eigen::VectorXd delta(C);
  std::vector<Eigen::VectorXi> back(n, Eigen::VectorXi::Zero(C));
  for (int y = 0; y < C; ++y) {
    delta(y) = masked(0, C, y);
  }
  for (int j = 1; j < n; ++j) {
    Eigen::VectorXd next(C);
    for (int y = 0; y < C; ++y) {
      double best = -std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int yp = 0; yp < C; ++yp) {
        double v = delta(yp) + masked(j, yp, y);
        if (v > best) {  // strict: ties keep the lowest y_prev
          best = v;
          arg = yp;
        }
      }
      next(y) = best;
      back[j](y) = arg;
    }
    delta = next;
  }
  if (final_mask) {
    delta += *final_mask;
  }
  int y = 0;
  for (int cand = 1; cand < C; ++cand) {
    if (delta(cand) > delta(y)) {
      y = cand;
    }
  }
  std::vector<int> tags(n);
  for (int j = n - 1; j >= 0; --j) {
    tags[j] = y;
    y = back[j](y);
  }
  return tags;
}

}  // namespace docner
