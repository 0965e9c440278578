#pragma once

// deterministic corpus generators for the end to end checks

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "docner/rng.hpp"

namespace synth {

inline std::string filler_word(std::size_t i) { return "w" + std::to_string(i); }

// Documents where every mention is locally identifiable and repeated across
// the document's sentences. Two single-token surfaces per type; each mention
// sits between filler words that track its type, so word identity, character
// prefix and neighbor context all agree. Types and surface ids rotate
// deterministically so no type is starved of examples. A 10-document corpus
// built this way is small and redundant enough for plain SGD to memorize.
inline std::string memorization_corpus(int docs) {
  const std::vector<std::string> types = {"PER", "ORG", "LOC", "MISC"};
  std::string out;
  for (int d = 0; d < docs; ++d) {
    out += "-DOCSTART- O\n\n";
    int type_a = d % 4;
    int type_b = (type_a + 1 + (d / 4) % 3) % 4;
    int id_a = (d / 4) % 2;
    int id_b = d % 2;

    auto lower = [](std::string s) {
      for (char& c : s) c = char(std::tolower(c));
      return s;
    };
    auto emit_mention = [&](int type, int id) {
      out += lower(types[type]) + std::to_string(id) + "\tS-" + types[type] +
             "\n";
    };
    auto emit_filler = [&](int type) {
      out += "f" + lower(types[type]) + "\tO\n";
    };

    for (int s = 0; s < 4; ++s) {
      emit_filler(type_a);
      emit_mention(type_a, id_a);
      emit_filler(type_a);
      emit_filler(type_b);
      emit_mention(type_b, id_b);
      emit_filler(type_b);
      out += "\n";
    }
  }
  return out;
}

// Documents whose mention surfaces are shared between PER and ORG. The
// deciding keyword sits in a marker sentence at the top of the document;
// the second occurrence of each surface appears at least three sentences
// later surrounded by plain filler, so a two-sentence context window never
// sees the keyword and only the repeated-surface connection can carry the
// evidence. Assignments are balanced per surface so the embedding of a
// surface is useless for picking its type.
inline std::string context_corpus(int docs, std::uint64_t seed) {
  docner::RngStream rng(seed);
  const int kSurfaces = 6;
  std::map<int, int> per_count, org_count;

  auto pick_type = [&](int surface) {
    int p = per_count[surface], o = org_count[surface];
    bool per;
    if (p < o) {
      per = true;
    } else if (o < p) {
      per = false;
    } else {
      per = rng.bernoulli(0.5);
    }
    (per ? per_count : org_count)[surface] += 1;
    return per;
  };

  std::string out;
  for (int d = 0; d < docs; ++d) {
    out += "-DOCSTART- O\n\n";
    int sa = int(rng.below(kSurfaces));
    int sb = int(rng.below(kSurfaces));
    if (sb == sa) sb = (sa + 1) % kSurfaces;
    bool a_per = pick_type(sa);
    bool b_per = pick_type(sb);
    std::string ent_a = "amb" + std::to_string(sa);
    std::string ent_b = "amb" + std::to_string(sb);
    std::string tag_a = a_per ? "S-PER" : "S-ORG";
    std::string tag_b = b_per ? "S-PER" : "S-ORG";

    auto filler_line = [&] { return filler_word(rng.below(20)) + "\tO\n"; };
    auto filler_sentence = [&] {
      for (int i = 0; i < 3; ++i) out += filler_line();
      out += "\n";
    };

    // marker sentences: keyword right next to the mention
    out += (a_per ? "person" : "company") + std::string("\tO\n");
    out += ent_a + "\t" + tag_a + "\n";
    out += filler_line();
    out += "\n";
    out += (b_per ? "person" : "company") + std::string("\tO\n");
    out += ent_b + "\t" + tag_b + "\n";
    out += filler_line();
    out += "\n";

    filler_sentence();
    filler_sentence();
    filler_sentence();

    // ambiguous sentences: same surfaces, nothing informative in reach
    out += filler_line();
    out += ent_a + "\t" + tag_a + "\n";
    out += filler_line();
    out += "\n";
    filler_sentence();
    out += filler_line();
    out += ent_b + "\t" + tag_b + "\n";
    out += filler_line();
    out += "\n";
  }
  return out;
}

}  // namespace synth
