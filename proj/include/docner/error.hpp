#pragma once

#include <stdexcept>
#include <string>

namespace docner {

// Shape mismatch in a tensor operation.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file (corpus, embeddings, config, checkpoint).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Well-formed input with invalid content (unknown label, bad column spec).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values or failed numeric checks.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace docner
