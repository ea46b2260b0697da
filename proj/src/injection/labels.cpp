#include "wikiseo/injection/labels.hpp"

#include <cctype>
#include <set>

#include "wikiseo/common/error.hpp"
#include "wikiseo/common/random.hpp"
#include "wikiseo/corpus/lexicon.hpp"
#include "wikiseo/corpus/text.hpp"

namespace wikiseo::injection {
namespace {

constexpr std::size_t kMaxOrgTokens = 4;

bool gap_is_space(const std::string& text, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to; ++i) {
    if (!std::isspace(static_cast<unsigned char>(text[i]))) return false;
  }
  return true;
}

}  // namespace

std::string to_string(RevisionEntity e) {
  switch (e) {
    case RevisionEntity::kReplacement: return "REPLACEMENT";
    case RevisionEntity::kInsertion: return "INSERTION";
    case RevisionEntity::kUnsuitability: return "UNSUITABILITY";
  }
  return "UNSUITABILITY";
}

RevisionEntity entity_from_string(const std::string& s) {
  if (s == "REPLACEMENT") return RevisionEntity::kReplacement;
  if (s == "INSERTION") return RevisionEntity::kInsertion;
  if (s == "UNSUITABILITY") return RevisionEntity::kUnsuitability;
  throw ParseError("unknown revision entity '" + s + "'");
}

InjectionInputs::InjectionInputs(corpus::Paragraph raw_, std::string promo_, std::string query_)
    : raw(std::move(raw_)), promo(std::move(promo_)), query(std::move(query_)) {
  const auto n = corpus::tokenize(promo).size();
  require(n >= 1 && n <= 8, "injection: promotional content must have 1..8 tokens");
}

TokenCues token_cues(const InjectionInputs& in) {
  const std::string& text = in.raw.text();
  const auto spans = corpus::tokenize_spans(text);
  const auto q = corpus::tokenize(in.query);
  const std::set<std::string> qset(q.begin(), q.end());
  TokenCues c;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& s = spans[i];
    c.capitalized.push_back(std::isupper(static_cast<unsigned char>(text[s.begin])) != 0);
    bool initial = true;
    for (std::size_t k = s.begin; k > 0; --k) {
      const char ch = text[k - 1];
      if (std::isspace(static_cast<unsigned char>(ch))) continue;
      initial = ch == '.' || ch == '!' || ch == '?';
      break;
    }
    c.sentence_initial.push_back(initial);
    c.query_match.push_back(qset.count(s.text) > 0);
  }
  return c;
}

TagSequence heuristic_label(const InjectionInputs& in) {
  const std::string& text = in.raw.text();
  const auto spans = corpus::tokenize_spans(text);
  const auto cues = token_cues(in);
  const std::size_t n = spans.size();
  TagSequence tags(n, RevisionEntity::kUnsuitability);

  for (std::size_t i = 0; i < n; ++i) {
    if (corpus::lexicons::promo_keywords().contains(spans[i].text) || cues.query_match[i]) {
      tags[i] = RevisionEntity::kInsertion;
    }
  }
  // organisation names
  for (std::size_t i = 0; i < n; ++i) {
    if (!cues.capitalized[i] || !corpus::lexicons::org_suffixes().contains(spans[i].text)) continue;
    std::size_t b = i;
    while (b > 0 && i - b + 1 < kMaxOrgTokens && cues.capitalized[b - 1] &&
           gap_is_space(text, spans[b - 1].end, spans[b].begin)) {
      --b;
    }
    if (b == i) continue;
    for (std::size_t k = b; k <= i; ++k) tags[k] = RevisionEntity::kReplacement;
  }
  // geolocation modifiers
  for (std::size_t i = 0; i < n; ++i) {
    if (spans[i].text != "in") continue;
    std::size_t j = i + 1;
    if (j < n && spans[j].text == "the") ++j;
    if (j >= n || !cues.capitalized[j]) continue;
    for (std::size_t len = 3; len >= 1; --len) {
      if (j + len > n) continue;
      std::vector<std::string> words;
      for (std::size_t k = j; k < j + len; ++k) words.push_back(spans[k].text);
      if (corpus::lexicons::geo_gazetteer().contains(corpus::join_tokens(words))) {
        for (std::size_t k = j; k < j + len; ++k) tags[k] = RevisionEntity::kReplacement;
        break;
      }
    }
  }
  return tags;
}

std::vector<std::pair<std::size_t, std::size_t>> replacement_spans(const TagSequence& tags) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < tags.size();) {
    if (tags[i] != RevisionEntity::kReplacement) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < tags.size() && tags[j] == RevisionEntity::kReplacement) ++j;
    out.emplace_back(i, j);
    i = j;
  }
  return out;
}

}  // namespace wikiseo::injection

namespace wikiseo::injection {

std::vector<std::pair<InjectionInputs, TagSequence>> heuristic_dataset(const std::vector<corpus::RawParagraph>& pool,
                                                                       const std::vector<std::string>& promos,
                                                                       const std::vector<std::string>& queries,
                                                                       std::size_t n, std::uint64_t seed) {
  require(!pool.empty() && !promos.empty() && !queries.empty(), "heuristic_dataset: empty inputs");
  std::vector<std::vector<std::string>> query_tokens;
  for (const auto& q : queries) query_tokens.push_back(corpus::tokenize(q));
  Rng rng(seed);
  std::vector<std::pair<InjectionInputs, TagSequence>> out;
  out.reserve(n);
  while (out.size() < n) {
    const auto& p = rng.pick(pool).paragraph;
    std::string query = rng.pick(queries);
    if (rng.bernoulli(0.5)) {
      const std::set<std::string> toks(p.tokens().begin(), p.tokens().end());
      std::vector<std::size_t> present;
      for (std::size_t i = 0; i < queries.size(); ++i) {
        bool all = !query_tokens[i].empty();
        for (const auto& t : query_tokens[i]) all = all && toks.count(t);
        if (all) present.push_back(i);
      }
      if (!present.empty()) query = queries[rng.pick(present)];
    }
    InjectionInputs in(p, rng.pick(promos), query);
    TagSequence tags = heuristic_label(in);
    out.emplace_back(std::move(in), std::move(tags));
  }
  return out;
}

}  // namespace wikiseo::injection
