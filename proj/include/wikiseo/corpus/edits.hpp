#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wikiseo/common/random.hpp"
#include "wikiseo/corpus/article.hpp"

namespace wikiseo::corpus {

enum class EditKind { kLegitimate, kBlocklist, kOffTopic, kGibberish, kSpam };

std::string to_string(EditKind k);

/// A single-paragraph insertion.
struct Edit {
  Article before;
  Article after;
  EditKind kind = EditKind::kLegitimate;

  bool damaging() const { return kind != EditKind::kLegitimate; }
};

/// Text of a vandal-style paragraph (blocklist, gibberish or spam).
std::string vandal_text(EditKind kind, Rng& rng);

/// Labeled single-paragraph insertions into indexed articles. Legitimate
/// edits insert a pool paragraph of the article's own category; damaging
/// ones insert vandal text or a pool paragraph from another category.
std::vector<Edit> synth_edits(const Corpus& c, std::size_t n, std::uint64_t seed, double damaging_share = 0.5);

}  // namespace wikiseo::corpus
