#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wikiseo/corpus/article.hpp"

namespace wikiseo::corpus {

/// Fixes the generated vocabulary. Kept separate from the corpus seed so
/// that differently seeded corpora share one word-vector table.
struct VocabularySpec {
  std::uint64_t seed = 2024;
  int categories = 8;
  int keywords_per_category = 48;
  int drugs_per_category = 16;
  int dimension = 50;
};

struct CategoryVocab {
  std::string name;
  std::vector<std::string> keywords;
  std::vector<std::string> drugs;   // surface forms, capitalised
  std::vector<std::string> brands;  // one per drug
};

struct Vocabulary {
  VocabularySpec spec;
  std::vector<CategoryVocab> categories;
  std::vector<std::string> background;
  std::vector<std::string> title_nouns;
  std::vector<std::string> template_words;
  std::vector<std::string> orgs;        // "Stem Suffix" surface forms
  std::vector<std::string> locations;   // capitalised gazetteer entries
  std::vector<std::string> businesses;  // promotional content candidates

  std::vector<std::string> all_drugs() const;
  /// Category index of a drug surface form, or -1.
  int category_of_drug(const std::string& drug) const;
};

Vocabulary build_vocabulary(const VocabularySpec& spec = {});

struct CorpusSpec {
  int pool_articles = -1;  // -1: half the article count
  int min_paragraphs = 3;
  int max_paragraphs = 5;
  int min_sentences = 2;
  int max_sentences = 4;
  double primary_drug_share = 0.45;
  double cross_category_share = 0.08;
  double zipf_exponent = 0.9;
};

/// Deterministic desk-scale corpus. Articles belong to one category and
/// draw keywords and drug mentions from that category's distribution;
/// consecutive paragraphs are chained by a shared named entity so that
/// paragraph order carries sentence-level coherence.
Corpus synth_corpus(std::uint64_t seed, int n_articles, const Vocabulary& vocab, const CorpusSpec& spec = {});

/// `n` distinct drug names used as search queries, most-mentioned first
/// within a seeded shuffle.
std::vector<std::string> synth_queries(const Vocabulary& vocab, int n, std::uint64_t seed);

/// Word vectors with category structure: keywords and drugs cluster around
/// a per-category centroid; function words get short vectors.
std::vector<std::pair<std::string, std::vector<double>>> synth_word_vectors(const Vocabulary& vocab);

}  // namespace wikiseo::corpus
