#pragma once

#include <string>
#include <vector>

namespace docner {

// Label strings are "O" or "<prefix>-<type>" with prefix B, I, E or S.
struct TagParts {
  char prefix = 'O';
  std::string type;  // empty for O
};

TagParts parse_tag(const std::string& tag);  // throws DataError on junk

// Entity category of a label: the type with its position prefix stripped,
// "O" for outside.
std::string tag_category(const std::string& tag);

struct Span {
  int start = 0;  // inclusive token offsets within one sentence
  int end = 0;
  std::string type;
  bool operator==(const Span&) const = default;
  bool operator<(const Span& o) const {
    if (start != o.start) return start < o.start;
    if (end != o.end) return end < o.end;
    return type < o.type;
  }
};

// Span extraction tolerant of malformed sequences, matching the usual
// conlleval reading: B and S always open; I and E continue only a compatible
// open span of the same type and otherwise open a new one; runs left open at
// a type change, an O, or the sentence end still count.
std::vector<Span> spans_of(const std::vector<std::string>& tags);

// Canonical BIOES rendering of a span set (spans must be disjoint, in order).
std::vector<std::string> spans_to_bioes(const std::vector<Span>& spans,
                                        int length);
// IOB2 (every span opens with B-) and IOB1 (B- only when needed to split
// adjacent same-type spans). For generating fixtures.
std::vector<std::string> spans_to_iob2(const std::vector<Span>& spans,
                                       int length);
std::vector<std::string> spans_to_iob1(const std::vector<Span>& spans,
                                       int length);

struct BioesConversion {
  std::vector<std::string> tags;
  int repairs = 0;  // dangling I- promoted to B-
};

// IOB (either flavor) to BIOES. Dangling I- with no compatible predecessor
// is read as a span start and counted as a repair.
BioesConversion to_bioes(const std::vector<std::string>& iob);

bool is_valid_bioes(const std::vector<std::string>& tags);

}  // namespace docner
