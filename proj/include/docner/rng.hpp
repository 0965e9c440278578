#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace docner {

// FNV-1a, also used for config hashing and stream derivation.
inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a_mix(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Seed for a named substream of a master seed. Purely functional so any
// consumer (init, dropout, sampling, mc passes) can rebuild its stream
// without threading generator state around.
inline std::uint64_t stream_seed(std::uint64_t master, std::string_view name,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = fnv1a_mix(0xcbf29ce484222325ull, master);
  h = fnv1a(name, h);
  h = fnv1a_mix(h, a);
  h = fnv1a_mix(h, b);
  return h;
}

class RngStream {
 public:
  RngStream() : eng_(0) {}
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }

  // true with probability p
  bool bernoulli(double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(eng_) < p;
  }

  // value in [0, n)
  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    std::shuffle(v.begin(), v.end(), eng_);
  }

  // k distinct elements of v, order of first pick. Fisher-Yates prefix.
  template <typename T>
  std::vector<T> sample(std::vector<T> v, std::size_t k) {
    if (k >= v.size()) {
      return v;
    }
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j =
          i + std::uniform_int_distribution<std::size_t>(0, v.size() - 1 - i)(eng_);
      std::swap(v[i], v[j]);
    }
    v.resize(k);
    return v;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace docner
