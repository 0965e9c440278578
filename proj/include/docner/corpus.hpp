#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "docner/tags.hpp"

namespace docner {

struct Token {
  std::string surface;
  std::string lowercase;
  std::string tag;  // BIOES label string
  int word_id = -1;
  std::vector<int> char_ids;
  int tag_id = -1;
  int doc_position = -1;  // 0-based offset in the flattened document
};

struct Sentence {
  std::vector<Token> tokens;
  std::size_t size() const { return tokens.size(); }
};

struct Document {
  std::string id;
  std::vector<Sentence> sentences;
  std::size_t token_count() const;
  // Token at a flattened document position.
  const Token& at(int doc_position) const;
};

struct LoadStats {
  // As-read counts: every blank-separated block including document marker
  // lines, and every non-blank line.
  std::size_t raw_sentences = 0;
  std::size_t raw_tokens = 0;
  // Parsed counts, markers excluded.
  std::size_t documents = 0;
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  int tag_repairs = 0;
};

struct Corpus {
  std::vector<Document> documents;
  LoadStats stats;
  std::size_t sentence_count() const;
  std::size_t token_count() const;
};

struct ColumnSpec {
  int token_column = 0;
  int tag_column = -1;  // -1 means last column
  std::string doc_marker = "-DOCSTART-";
};

// Whitespace-separated columns, blank line between sentences, marker line
// opening a document. Without markers the whole file is one document.
// Labels are converted to BIOES; already-BIOES files pass through validated.
Corpus load_conll(const std::string& path, const ColumnSpec& spec = {});

// Same parse from an in-memory buffer (fixtures, tests).
Corpus parse_conll(const std::string& text, const ColumnSpec& spec = {},
                   const std::string& origin = "<memory>");

class Vocab {
 public:
  static constexpr int kPadWord = 0;
  static constexpr int kUnkWord = 1;
  static constexpr int kUnkChar = 0;

  // Words, characters and the tag set from a training corpus. The tag set is
  // O plus B/I/E/S for every entity type seen, so any position of a known
  // type is representable.
  static Vocab build(const Corpus& train);

  int word_id(const std::string& surface) const;  // exact, lowercase, unk
  int char_id(char c) const;
  int tag_id(const std::string& tag) const;  // throws DataError when unknown
  const std::string& tag_name(int id) const;

  int num_words() const { return static_cast<int>(words_.size()); }
  int num_chars() const { return static_cast<int>(chars_.size()); }
  int num_tags() const { return static_cast<int>(tags_.size()); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::string>& tags() const { return tags_; }
  const std::vector<std::string>& entity_types() const { return types_; }

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> words_;  // [PAD, UNK, ...]
  std::vector<std::string> chars_;  // [UNK, ...]
  std::vector<std::string> tags_;   // [O, B-t1, I-t1, E-t1, S-t1, ...]
  std::vector<std::string> types_;
  void index();
  std::map<std::string, int> word_index_;
  std::map<std::string, int> lower_index_;  // first surface with that folding
  std::map<std::string, int> tag_index_;
  std::map<char, int> char_index_;
};

// Fill ids on every token; validates labels against the vocab tag set.
void apply_vocab(Corpus& corpus, const Vocab& vocab);

}  // namespace docner
