#include "wikiseo/injection/inject.hpp"

#include "wikiseo/common/error.hpp"
#include "wikiseo/common/random.hpp"
#include "wikiseo/corpus/text.hpp"

namespace wikiseo::injection {

corpus::Paragraph inject(const InjectionInputs& in, const TagSequence& tags, std::uint64_t seed) {
  const std::string& text = in.raw.text();
  const auto spans = corpus::tokenize_spans(text);
  require(tags.size() == spans.size(), "inject: tag sequence does not match paragraph tokens");

  struct Site {
    std::size_t begin, end;  // token range
    bool replace;
  };
  std::vector<Site> sites;
  for (const auto& [b, e] : replacement_spans(tags)) sites.push_back({b, e, true});
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == RevisionEntity::kInsertion) sites.push_back({i, i + 1, false});
  }
  if (sites.empty()) throw InfeasibleError("inject: no eligible position in raw paragraph");

  Rng rng(seed);
  const Site& s = sites[rng.index(sites.size())];
  const std::size_t from = spans[s.begin].begin, to = spans[s.end - 1].end;
  if (s.replace) return corpus::Paragraph(text.substr(0, from) + in.promo + text.substr(to));
  return corpus::Paragraph(text.substr(0, to) + " in " + in.promo + text.substr(to));
}

}  // namespace wikiseo::injection
