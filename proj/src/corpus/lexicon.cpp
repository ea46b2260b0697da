#include "wikiseo/corpus/lexicon.hpp"

#include <fstream>

#include "wikiseo/common/error.hpp"
#include "wikiseo/corpus/text.hpp"

namespace wikiseo::corpus {

Lexicon::Lexicon(std::vector<std::string> entries) {
  for (auto& e : entries) {
    std::string w = to_lower(trim(e));
    if (w.empty() || set_.count(w) > 0) continue;
    set_.insert(w);
    entries_.push_back(std::move(w));
  }
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open lexicon " + path.string());
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    entries.push_back(std::move(t));
  }
  return Lexicon(std::move(entries));
}

bool Lexicon::contains(std::string_view word) const { return set_.count(std::string(word)) > 0; }

namespace lexicons {

const Lexicon& stopwords() {
  static const Lexicon lex({"the", "a", "an", "of", "and", "or", "in", "on", "at", "to", "for", "with", "by",
                            "from", "as", "is", "was", "are", "were", "be", "been", "it", "its", "this",
                            "that", "these", "those", "which", "who", "has", "have", "had", "also", "may",
                            "can", "not", "such", "than", "other", "more", "most", "into", "after", "under",
                            "when", "while", "there", "their", "they", "but", "if", "then", "so", "both"});
  return lex;
}

const Lexicon& verbs() {
  static const Lexicon lex({"treats", "reduces", "inhibits", "binds", "causes", "increases", "lowers",
                            "blocks", "activates", "affects", "prevents", "relieves", "improves", "targets",
                            "modulates", "controls", "enhances", "suppresses", "stabilizes", "restores",
                            "reported", "showed", "described", "studied", "suggest", "show", "confirmed"});
  return lex;
}

const Lexicon& promo_keywords() {
  static const Lexicon lex({"sold", "marketed", "available", "supplied", "distributed", "manufactured",
                            "prescribed", "purchased", "offered", "produced"});
  return lex;
}

const Lexicon& geo_gazetteer() {
  static const Lexicon lex({"united states", "united kingdom", "canada", "europe", "japan", "india",
                            "germany", "france", "australia", "china", "brazil", "mexico"});
  return lex;
}

const Lexicon& org_suffixes() {
  static const Lexicon lex({"pharmaceuticals", "laboratories", "pharma", "therapeutics", "biosciences",
                            "inc", "healthcare", "biotech"});
  return lex;
}

const Lexicon& blocklist() {
  static const Lexicon lex({"crap", "stupid", "idiot", "sucks", "lol", "poop", "dumb", "hoax", "loser",
                            "garbage", "moron", "scam"});
  return lex;
}

}  // namespace lexicons
}  // namespace wikiseo::corpus
