#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "docner/corpus.hpp"
#include "docner/embeddings.hpp"
#include "docner/error.hpp"

using namespace docner;

namespace {

std::vector<std::string> tags_of(const Sentence& s) {
  std::vector<std::string> out;
  for (const Token& t : s.tokens) out.push_back(t.tag);
  return out;
}

}  // namespace

TEST_CASE("marker lines split documents") {
  std::string text =
      "-DOCSTART- -X- O\n"
      "\n"
      "EU NNP S-ORG\n"
      "rejects VBZ O\n"
      "\n"
      "German JJ S-MISC\n"
      "\n"
      "-DOCSTART- -X- O\n"
      "\n"
      "Peter NNP B-PER\n"
      "Blackburn NNP E-PER\n";
  Corpus c = parse_conll(text, {}, "fixture");
  REQUIRE(c.documents.size() == 2);
  CHECK(c.documents[0].sentences.size() == 2);
  CHECK(c.documents[1].sentences.size() == 1);
  CHECK(c.documents[0].sentences[0].tokens[0].surface == "EU");
  CHECK(c.documents[0].sentences[0].tokens[0].tag == "S-ORG");
  CHECK(c.documents[1].sentences[0].tokens[1].surface == "Blackburn");

  // marker blocks count as raw sentences/tokens, not parsed ones
  CHECK(c.stats.raw_sentences == 5);
  CHECK(c.stats.raw_tokens == 7);
  CHECK(c.stats.documents == 2);
  CHECK(c.stats.sentences == 3);
  CHECK(c.stats.tokens == 5);

  // doc positions flatten across sentences
  CHECK(c.documents[0].sentences[0].tokens[0].doc_position == 0);
  CHECK(c.documents[0].sentences[1].tokens[0].doc_position == 2);
  CHECK(c.documents[0].token_count() == 3);
  CHECK(c.documents[0].at(2).surface == "German");
}

TEST_CASE("a file with no markers is one document") {
  Corpus c = parse_conll("a O\n\nb O\n", {}, "plain");
  REQUIRE(c.documents.size() == 1);
  CHECK(c.documents[0].sentences.size() == 2);
  CHECK(c.documents[0].id == "plain#0");
}

TEST_CASE("column selection and malformed rows") {
  ColumnSpec spec;
  spec.token_column = 1;
  spec.tag_column = 2;
  Corpus c = parse_conll("x tok S-LOC\n", spec, "cols");
  CHECK(c.documents[0].sentences[0].tokens[0].surface == "tok");
  CHECK(c.documents[0].sentences[0].tokens[0].tag == "S-LOC");

  CHECK_THROWS_AS(parse_conll("only\n", spec, "short"), ParseError);
  CHECK_THROWS_AS(parse_conll("tok BAD-TAG\n", {}, "badtag"), DataError);
  // content on the marker's own line after the marker token is tolerated,
  // but a non-blank sentence merged into the marker block is not
  CHECK_THROWS_AS(parse_conll("-DOCSTART- O\nword O\n", {}, "merged"),
                  ParseError);
}

TEST_CASE("crlf and trailing blank lines are tolerated") {
  Corpus c = parse_conll("a O\r\nb O\r\n\r\n\r\n", {}, "crlf");
  CHECK(c.stats.tokens == 2);
  CHECK(c.documents[0].sentences.size() == 1);
}

TEST_CASE("iob input converts to the BIOES scheme") {
  Corpus c = parse_conll(
      "w1 O\nw2 I-ORG\nw3 I-ORG\nw4 O\n\n"
      "w5 B-PER\nw6 I-PER\nw7 I-LOC\n",
      {}, "iob");
  CHECK(tags_of(c.documents[0].sentences[0]) ==
        std::vector<std::string>{"O", "B-ORG", "E-ORG", "O"});
  CHECK(tags_of(c.documents[0].sentences[1]) ==
        std::vector<std::string>{"B-PER", "E-PER", "S-LOC"});
  // w2 (IOB1 style) and w7 (type change) both repaired
  CHECK(c.stats.tag_repairs == 2);
}

TEST_CASE("valid BIOES passes through untouched") {
  Corpus c = parse_conll("a B-ORG\nb I-ORG\nc E-ORG\nd S-PER\ne O\n", {},
                         "bioes");
  CHECK(tags_of(c.documents[0].sentences[0]) ==
        std::vector<std::string>{"B-ORG", "I-ORG", "E-ORG", "S-PER", "O"});
  CHECK(c.stats.tag_repairs == 0);
}

TEST_CASE("span round trip") {
  std::vector<Span> spans = {{0, 1, "ORG"}, {3, 3, "PER"}, {4, 6, "LOC"}};
  std::vector<std::string> bioes = spans_to_bioes(spans, 8);
  CHECK(bioes == std::vector<std::string>{"B-ORG", "E-ORG", "O", "S-PER",
                                          "B-LOC", "I-LOC", "E-LOC", "O"});
  CHECK(spans_of(bioes) == spans);
  CHECK(is_valid_bioes(bioes));

  std::vector<std::string> iob1 = spans_to_iob1(spans, 8);
  std::vector<std::string> iob2 = spans_to_iob2(spans, 8);
  CHECK(to_bioes(iob1).tags == bioes);
  CHECK(to_bioes(iob2).tags == bioes);
  // adjacent same-type spans force a B- even in IOB1
  std::vector<Span> touching = {{0, 0, "A"}, {1, 2, "A"}};
  std::vector<std::string> t1 = spans_to_iob1(touching, 3);
  CHECK(t1 == std::vector<std::string>{"I-A", "B-A", "I-A"});
  CHECK(to_bioes(t1).tags == spans_to_bioes(touching, 3));
}

TEST_CASE("malformed predictions still yield spans") {
  // bare I run, type change mid-span, unterminated B
  CHECK(spans_of({"O", "I-ORG", "I-ORG"}) ==
        std::vector<Span>{{1, 2, "ORG"}});
  CHECK(spans_of({"B-ORG", "I-LOC"}) ==
        std::vector<Span>{{0, 0, "ORG"}, {1, 1, "LOC"}});
  CHECK(spans_of({"B-PER"}) == std::vector<Span>{{0, 0, "PER"}});
  CHECK(spans_of({"E-PER", "S-LOC"}) ==
        std::vector<Span>{{0, 0, "PER"}, {1, 1, "LOC"}});
  CHECK(is_valid_bioes({"B-ORG", "I-LOC"}) == false);
  CHECK(is_valid_bioes({"O", "S-LOC", "O"}) == true);
}

TEST_CASE("tag parsing") {
  CHECK(parse_tag("O").prefix == 'O');
  CHECK(parse_tag("B-ORG").prefix == 'B');
  CHECK(parse_tag("B-ORG").type == "ORG");
  CHECK(parse_tag("S-MISC").type == "MISC");
  CHECK(tag_category("I-PER") == "PER");
  CHECK(tag_category("O") == "O");
  CHECK_THROWS_AS(parse_tag("Q-ORG"), DataError);
  CHECK_THROWS_AS(parse_tag("B-"), DataError);
  CHECK_THROWS_AS(parse_tag(""), DataError);
}

TEST_CASE("vocabulary construction and lookups") {
  Corpus c = parse_conll(
      "The O\nBank S-ORG\nof O\nEngland S-LOC\n\nthe O\nbank O\n", {},
      "vocab");
  Vocab v = Vocab::build(c);
  // first-occurrence order after PAD and UNK
  CHECK(v.words()[Vocab::kPadWord] == "<PAD>");
  CHECK(v.word_id("The") == 2);
  CHECK(v.word_id("Bank") == 3);
  // exact match first, then lowercase folding, then unk
  CHECK(v.word_id("the") == v.word_id("the"));
  CHECK(v.word_id("THE") == v.word_id("The"));  // folds to first "the" form
  CHECK(v.word_id("zzz") == Vocab::kUnkWord);
  CHECK(v.char_id('B') != v.char_id('b'));
  CHECK(v.char_id('#') == Vocab::kUnkChar);

  // tag set: O plus all four positions of every seen type, types sorted
  CHECK(v.num_tags() == 9);
  CHECK(v.tags()[0] == "O");
  CHECK(v.entity_types() == std::vector<std::string>{"LOC", "ORG"});
  CHECK(v.tag_id("O") == 0);
  CHECK(v.tag_name(v.tag_id("E-LOC")) == "E-LOC");
  CHECK_THROWS_AS(v.tag_id("S-GPE"), DataError);

  apply_vocab(c, v);
  const Token& bank = c.documents[0].sentences[0].tokens[1];
  CHECK(bank.word_id == 3);
  CHECK(bank.tag_id == v.tag_id("S-ORG"));
  CHECK(bank.char_ids.size() == 4);

  nlohmann::json j = v.to_json();
  Vocab back = Vocab::from_json(j);
  CHECK(back.words() == v.words());
  CHECK(back.tags() == v.tags());
  CHECK(back.word_id("England") == v.word_id("England"));
  CHECK(back.char_id('B') == v.char_id('B'));
}

TEST_CASE("embedding file loading") {
  std::string path = "embed_fixture.txt";
  {
    std::ofstream f(path);
    f << "bank 0.1 0.2 0.3\n";
    f << "England 1.0 2.0 3.0\n";
  }
  Corpus c = parse_conll("Bank O\nEngland O\nzzz O\n", {}, "e");
  Vocab v = Vocab::build(c);
  RngStream rng(5);
  EmbeddingTable t = load_embeddings(path, v, 3, rng);

  CHECK(t.rows.rows() == v.num_words());
  CHECK(t.rows.cols() == 3);
  // PAD stays zero
  CHECK(t.rows.row(Vocab::kPadWord).cwiseAbs().maxCoeff() == 0.0);
  // "Bank" found via its lowercase form
  CHECK(t.rows(v.word_id("Bank"), 0) == doctest::Approx(0.1));
  CHECK(t.rows(v.word_id("England"), 2) == doctest::Approx(3.0));
  CHECK(t.pretrained[v.word_id("England")]);
  CHECK_FALSE(t.pretrained[v.word_id("zzz")]);
  // miss falls into the uniform band
  double bound = std::sqrt(3.0 / 3.0);
  CHECK(t.rows.row(v.word_id("zzz")).cwiseAbs().maxCoeff() <= bound);
  // coverage over real words only: bank, England covered; zzz not
  CHECK(t.coverage == doctest::Approx(2.0 / 3.0));

  {
    std::ofstream f(path);
    f << "word 0.1 0.2\n";  // wrong width
  }
  CHECK_THROWS_AS(load_embeddings(path, v, 3, rng), ParseError);
  CHECK_THROWS_AS(load_embeddings("no_such_file.txt", v, 3, rng), ParseError);
  std::remove(path.c_str());

  EmbeddingTable r = random_embeddings(v, 4, rng);
  CHECK(r.rows.rows() == v.num_words());
  CHECK(r.coverage == 0.0);
  CHECK(r.rows.row(Vocab::kPadWord).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("file loader reads from disk") {
  std::string path = "corpus_fixture.conll";
  {
    std::ofstream f(path);
    f << "-DOCSTART- O\n\nHello S-PER\n";
  }
  Corpus c = load_conll(path);
  CHECK(c.documents.size() == 1);
  CHECK(c.documents[0].id == "corpus_fixture.conll#0");
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_conll("missing.conll"), ParseError);
}
