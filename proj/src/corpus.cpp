#include "docner/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

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

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> fields;
  std::string f;
  while (is >> f) {
    fields.push_back(f);
  }
  return fields;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

std::size_t Document::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) {
    n += s.size();
  }
  return n;
}

const Token& Document::at(int doc_position) const {
  int p = doc_position;
  for (const auto& s : sentences) {
    if (p < static_cast<int>(s.size())) {
      return s.tokens[p];
    }
    p -= static_cast<int>(s.size());
  }
  throw DataError("doc position " + std::to_string(doc_position) +
                  " outside document " + id);
}

std::size_t Corpus::sentence_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) {
    n += d.sentences.size();
  }
  return n;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) {
    n += d.token_count();
  }
  return n;
}

namespace {

struct RawSentence {
  std::vector<std::string> surfaces;
  std::vector<std::string> labels;
};

// Converts one sentence's labels to BIOES. Files already in BIOES (any E- or
// S- present anywhere) are validated span-wise instead of re-converted.
std::vector<std::string> finalize_labels(const RawSentence& raw, bool bioes_in,
                                         int* repairs) {
  if (!bioes_in) {
    BioesConversion conv = to_bioes(raw.labels);
    *repairs += conv.repairs;
    return conv.tags;
  }
  std::vector<std::string> fixed =
      spans_to_bioes(spans_of(raw.labels), static_cast<int>(raw.labels.size()));
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (fixed[i] != raw.labels[i]) {
      ++*repairs;
    }
  }
  return fixed;
}

}  // namespace

Corpus parse_conll(const std::string& text, const ColumnSpec& spec,
                   const std::string& origin) {
  Corpus corpus;
  LoadStats& st = corpus.stats;

  std::vector<std::vector<RawSentence>> docs;  // raw sentences per document
  std::vector<RawSentence> current_doc;
  RawSentence current;
  bool any_marker = false;
  bool in_block = false;
  bool block_is_marker = false;
  bool bioes_in = false;

  auto end_sentence = [&]() {
    if (!current.surfaces.empty()) {
      current_doc.push_back(std::move(current));
      current = RawSentence{};
    }
  };
  auto end_document = [&]() {
    end_sentence();
    if (!current_doc.empty()) {
      docs.push_back(std::move(current_doc));
      current_doc.clear();
    }
  };

  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (blank(line)) {
      if (in_block) {
        if (!block_is_marker) {
          end_sentence();
        }
        in_block = false;
      }
      continue;
    }
    ++st.raw_tokens;
    if (!in_block) {
      ++st.raw_sentences;
      in_block = true;
      block_is_marker = false;
    }

    std::vector<std::string> fields = split_ws(line);
    int tok_col = spec.token_column;
    if (tok_col < static_cast<int>(fields.size()) &&
        fields[tok_col] == spec.doc_marker) {
      any_marker = true;
      block_is_marker = true;
      end_document();
      continue;
    }
    int tag_col = spec.tag_column >= 0 ? spec.tag_column
                                       : static_cast<int>(fields.size()) - 1;
    if (tok_col >= static_cast<int>(fields.size()) ||
        tag_col >= static_cast<int>(fields.size()) || tag_col == tok_col) {
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": needs token and label columns, got " +
                       std::to_string(fields.size()) + " fields");
    }
    const std::string& surface = fields[tok_col];
    if (block_is_marker) {
      // marker block must be the marker line alone
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": content follows document marker in the same block");
    }
    const std::string& label = fields[tag_col];
    TagParts parts = parse_tag(label);  // throws DataError on junk
    if (parts.prefix == 'E' || parts.prefix == 'S') {
      bioes_in = true;
    }
    current.surfaces.push_back(surface);
    current.labels.push_back(label);
  }
  end_document();

  if (!any_marker && docs.size() > 1) {
    throw ParseError(origin + ": internal document split without marker");
  }

  for (std::size_t di = 0; di < docs.size(); ++di) {
    Document doc;
    doc.id = origin + "#" + std::to_string(di);
    int pos = 0;
    for (RawSentence& raw : docs[di]) {
      Sentence sent;
      std::vector<std::string> tags =
          finalize_labels(raw, bioes_in, &st.tag_repairs);
      for (std::size_t i = 0; i < raw.surfaces.size(); ++i) {
        Token tok;
        tok.surface = raw.surfaces[i];
        tok.lowercase = lower_copy(tok.surface);
        tok.tag = tags[i];
        tok.doc_position = pos++;
        sent.tokens.push_back(std::move(tok));
      }
      st.tokens += sent.size();
      ++st.sentences;
      doc.sentences.push_back(std::move(sent));
    }
    ++st.documents;
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

Corpus load_conll(const std::string& path, const ColumnSpec& spec) {
  std::ifstream is(path);
  if (!is) {
    throw ParseError("cannot open corpus: " + path);
  }
  std::ostringstream buf;
  buf << is.rdbuf();
  std::string base = path;
  auto slash = base.find_last_of('/');
  if (slash != std::string::npos) {
    base = base.substr(slash + 1);
  }
  return parse_conll(buf.str(), spec, base);
}

Vocab Vocab::build(const Corpus& train) {
  Vocab v;
  v.words_ = {"<PAD>", "<UNK>"};
  v.chars_ = {"<UNK>"};

  std::map<std::string, int> seen_word;
  std::map<char, int> seen_char;
  std::map<std::string, int> seen_type;
  for (const auto& d : train.documents) {
    for (const auto& s : d.sentences) {
      for (const auto& t : s.tokens) {
        if (!seen_word.count(t.surface)) {
          seen_word[t.surface] = 1;
          v.words_.push_back(t.surface);
        }
        for (char c : t.surface) {
          if (!seen_char.count(c)) {
            seen_char[c] = 1;
            v.chars_.push_back(std::string(1, c));
          }
        }
        std::string cat = tag_category(t.tag);
        if (cat != "O") {
          seen_type[cat] = 1;
        }
      }
    }
  }
  for (const auto& [type, _] : seen_type) {
    v.types_.push_back(type);
  }
  v.tags_ = {"O"};
  for (const std::string& type : v.types_) {
    for (const char* p : {"B-", "I-", "E-", "S-"}) {
      v.tags_.push_back(p + type);
    }
  }
  v.index();
  return v;
}

void Vocab::index() {
  word_index_.clear();
  lower_index_.clear();
  tag_index_.clear();
  char_index_.clear();
  for (int i = 0; i < static_cast<int>(words_.size()); ++i) {
    word_index_[words_[i]] = i;
    std::string low = lower_copy(words_[i]);
    lower_index_.emplace(low, i);  // first surface wins
  }
  for (int i = 0; i < static_cast<int>(chars_.size()); ++i) {
    if (chars_[i].size() == 1) {
      char_index_[chars_[i][0]] = i;
    }
  }
  for (int i = 0; i < static_cast<int>(tags_.size()); ++i) {
    tag_index_[tags_[i]] = i;
  }
}

int Vocab::word_id(const std::string& surface) const {
  auto it = word_index_.find(surface);
  if (it != word_index_.end()) {
    return it->second;
  }
  auto low = lower_index_.find(lower_copy(surface));
  if (low != lower_index_.end()) {
    return low->second;
  }
  return kUnkWord;
}

int Vocab::char_id(char c) const {
  auto it = char_index_.find(c);
  return it == char_index_.end() ? kUnkChar : it->second;
}

int Vocab::tag_id(const std::string& tag) const {
  auto it = tag_index_.find(tag);
  if (it == tag_index_.end()) {
    std::string valid;
    for (const auto& t : tags_) {
      valid += valid.empty() ? t : ", " + t;
    }
    throw DataError("unknown label \"" + tag + "\" (tag set: " + valid + ")");
  }
  return it->second;
}

const std::string& Vocab::tag_name(int id) const {
  if (id < 0 || id >= static_cast<int>(tags_.size())) {
    throw DataError("tag id " + std::to_string(id) + " outside tag set");
  }
  return tags_[id];
}

nlohmann::json Vocab::to_json() const {
  return {{"words", words_}, {"chars", chars_}, {"types", types_}};
}

Vocab Vocab::from_json(const nlohmann::json& j) {
  Vocab v;
  v.words_ = j.at("words").get<std::vector<std::string>>();
  v.chars_ = j.at("chars").get<std::vector<std::string>>();
  v.types_ = j.at("types").get<std::vector<std::string>>();
  v.tags_ = {"O"};
  for (const std::string& type : v.types_) {
    for (const char* p : {"B-", "I-", "E-", "S-"}) {
      v.tags_.push_back(p + type);
    }
  }
  v.index();
  return v;
}

void apply_vocab(Corpus& corpus, const Vocab& vocab) {
  for (auto& d : corpus.documents) {
    for (auto& s : d.sentences) {
      for (auto& t : s.tokens) {
        t.word_id = vocab.word_id(t.surface);
        t.char_ids.clear();
        for (char c : t.surface) {
          t.char_ids.push_back(vocab.char_id(c));
        }
        t.tag_id = vocab.tag_id(t.tag);
      }
    }
  }
}

}  // namespace docner
