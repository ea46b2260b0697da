#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wikiseo/corpus/article.hpp"

namespace wikiseo::injection {

enum class RevisionEntity : int { kReplacement = 0, kInsertion = 1, kUnsuitability = 2 };

inline constexpr int kEntityCount = 3;

std::string to_string(RevisionEntity e);
RevisionEntity entity_from_string(const std::string& s);

/// One label per paragraph token.
using TagSequence = std::vector<RevisionEntity>;

struct InjectionInputs {
  corpus::Paragraph raw;
  std::string promo;  // business name, 1..8 tokens
  std::string query;

  InjectionInputs(corpus::Paragraph raw, std::string promo, std::string query);
};

/// Per-token surface cues shared by the labeler and the tagger.
struct TokenCues {
  std::vector<bool> capitalized;
  std::vector<bool> sentence_initial;
  std::vector<bool> query_match;
};

TokenCues token_cues(const InjectionInputs& in);

/// REPLACEMENT on organisation names (capitalised run ending in an org
/// suffix) and gazetteer places following "in" / "in the"; INSERTION on
/// promotional keywords and query terms; UNSUITABILITY elsewhere.
TagSequence heuristic_label(const InjectionInputs& in);

/// Maximal runs of REPLACEMENT as [begin, end) token ranges.
std::vector<std::pair<std::size_t, std::size_t>> replacement_spans(const TagSequence& tags);

}  // namespace wikiseo::injection

namespace wikiseo::injection {

/// Heuristically labeled inputs over raw paragraphs. About half of the
/// examples use a query that occurs in the paragraph.
std::vector<std::pair<InjectionInputs, TagSequence>> heuristic_dataset(const std::vector<corpus::RawParagraph>& pool,
                                                                       const std::vector<std::string>& promos,
                                                                       const std::vector<std::string>& queries,
                                                                       std::size_t n, std::uint64_t seed);

}  // namespace wikiseo::injection
