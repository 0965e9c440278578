#include "docner/tags.hpp"

#include "docner/error.hpp"

namespace docner {

TagParts parse_tag(const std::string& tag) {
  if (tag == "O") {
    return {'O', ""};
  }
  if (tag.size() >= 3 && tag[1] == '-' &&
      (tag[0] == 'B' || tag[0] == 'I' || tag[0] == 'E' || tag[0] == 'S')) {
    return {tag[0], tag.substr(2)};
  }
  throw DataError("bad label \"" + tag +
                  "\" (expected O or B-/I-/E-/S- plus a type)");
}

std::string tag_category(const std::string& tag) {
  TagParts t = parse_tag(tag);
  return t.type.empty() ? "O" : t.type;
}

std::vector<Span> spans_of(const std::vector<std::string>& tags) {
  std::vector<Span> spans;
  int open_start = -1;
  std::string open_type;

  auto close = [&](int end) {
    if (open_start >= 0) {
      spans.push_back({open_start, end, open_type});
      open_start = -1;
    }
  };

  for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
    TagParts t = parse_tag(tags[i]);
    if (t.prefix == 'O') {
      close(i - 1);
      continue;
    }
    bool continues = (t.prefix == 'I' || t.prefix == 'E') && open_start >= 0 &&
                     open_type == t.type;
    if (!continues) {
      close(i - 1);
      open_start = i;
      open_type = t.type;
    }
    if (t.prefix == 'E' || t.prefix == 'S') {
      close(i);
    }
  }
  close(static_cast<int>(tags.size()) - 1);
  return spans;
}

std::vector<std::string> spans_to_bioes(const std::vector<Span>& spans,
                                        int length) {
  std::vector<std::string> tags(length, "O");
  for (const Span& s : spans) {
    if (s.start == s.end) {
      tags[s.start] = "S-" + s.type;
      continue;
    }
    tags[s.start] = "B-" + s.type;
    for (int i = s.start + 1; i < s.end; ++i) {
      tags[i] = "I-" + s.type;
    }
    tags[s.end] = "E-" + s.type;
  }
  return tags;
}

std::vector<std::string> spans_to_iob2(const std::vector<Span>& spans,
                                       int length) {
  std::vector<std::string> tags(length, "O");
  for (const Span& s : spans) {
    tags[s.start] = "B-" + s.type;
    for (int i = s.start + 1; i <= s.end; ++i) {
      tags[i] = "I-" + s.type;
    }
  }
  return tags;
}

std::vector<std::string> spans_to_iob1(const std::vector<Span>& spans,
                                       int length) {
  std::vector<std::string> tags(length, "O");
  std::string prev_type;
  int prev_end = -2;
  for (const Span& s : spans) {
    bool touches = (s.start == prev_end + 1) && (s.type == prev_type);
    tags[s.start] = (touches ? "B-" : "I-") + s.type;
    for (int i = s.start + 1; i <= s.end; ++i) {
      tags[i] = "I-" + s.type;
    }
    prev_type = s.type;
    prev_end = s.end;
  }
  return tags;
}

BioesConversion to_bioes(const std::vector<std::string>& iob) {
  int n = static_cast<int>(iob.size());
  // First resolve span boundaries, counting I- starts as repairs.
  int repairs = 0;
  std::vector<Span> spans;
  int open_start = -1;
  std::string open_type;
  auto close = [&](int end) {
    if (open_start >= 0) {
      spans.push_back({open_start, end, open_type});
      open_start = -1;
    }
  };
  for (int i = 0; i < n; ++i) {
    TagParts t = parse_tag(iob[i]);
    if (t.prefix == 'E' || t.prefix == 'S') {
      throw DataError("to_bioes: input already BIOES at token " +
                      std::to_string(i) + " (\"" + iob[i] + "\")");
    }
    if (t.prefix == 'O') {
      close(i - 1);
      continue;
    }
    if (t.prefix == 'B') {
      close(i - 1);
      open_start = i;
      open_type = t.type;
      continue;
    }
    // I-: continue when compatible, otherwise a new span (IOB1 start or a
    // malformed sequence).
    if (open_start >= 0 && open_type == t.type) {
      continue;
    }
    close(i - 1);
    open_start = i;
    open_type = t.type;
    ++repairs;
  }
  close(n - 1);
  return {spans_to_bioes(spans, n), repairs};
}

bool is_valid_bioes(const std::vector<std::string>& tags) {
  // Valid means every span renders back to the same tags: no dangling I/B,
  // no E without B, S alone, etc.
  std::vector<std::string> round;
  try {
    round = spans_to_bioes(spans_of(tags), static_cast<int>(tags.size()));
  } catch (const DataError&) {
    return false;
  }
  return round == tags;
}

}  // namespace docner
