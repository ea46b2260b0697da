#include "wikiseo/corpus/edits.hpp"

#include <map>

#include "wikiseo/common/error.hpp"
#include "wikiseo/corpus/lexicon.hpp"

namespace wikiseo::corpus {
namespace {

std::string random_word(Rng& rng, std::size_t lo, std::size_t hi) {
  std::string w;
  const std::size_t n = lo + rng.index(hi - lo + 1);
  for (std::size_t i = 0; i < n; ++i) w += static_cast<char>('a' + rng.index(26));
  return w;
}

std::string sentence_case(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string upper(std::string s) {
  for (char& c : s) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return s;
}

}  // namespace

std::string to_string(EditKind k) {
  switch (k) {
    case EditKind::kLegitimate: return "legitimate";
    case EditKind::kBlocklist: return "blocklist";
    case EditKind::kOffTopic: return "off_topic";
    case EditKind::kGibberish: return "gibberish";
    case EditKind::kSpam: return "spam";
  }
  return "unknown";
}

std::string vandal_text(EditKind kind, Rng& rng) {
  const auto& block = lexicons::blocklist().entries();
  const auto& stop = lexicons::stopwords().entries();
  std::string out;
  switch (kind) {
    case EditKind::kBlocklist: {
      const std::size_t n = 6 + rng.index(14);
      for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += rng.bernoulli(0.55) ? rng.pick(block) : rng.pick(stop);
      }
      return sentence_case(out) + (rng.bernoulli(0.5) ? "!!!" : ".");
    }
    case EditKind::kGibberish: {
      const std::size_t n = 4 + rng.index(20);
      for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        std::string w = random_word(rng, 3, 14);
        if (rng.bernoulli(0.3)) w = upper(w);
        if (rng.bernoulli(0.2)) w += std::to_string(rng.index(1000));
        out += w;
      }
      return out + (rng.bernoulli(0.5) ? "!!" : ".");
    }
    case EditKind::kSpam: {
      const std::vector<std::string> pitch = {"BUY", "CHEAP", "PILLS", "NOW", "FREE", "CLICK", "HERE", "BEST", "DEAL",
                                              "ORDER", "ONLINE", "DISCOUNT"};
      const std::size_t n = 5 + rng.index(12);
      for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        const double u = rng.uniform();
        if (u < 0.6) {
          out += rng.pick(pitch);
        } else if (u < 0.8) {
          out += std::to_string(100 + rng.index(900)) + "-" + std::to_string(1000 + rng.index(9000));
        } else {
          out += "www." + random_word(rng, 4, 9) + ".com";
        }
      }
      return out + "!!!";
    }
    default: throw ContractError("vandal_text: not a vandal edit kind");
  }
}

std::vector<Edit> synth_edits(const Corpus& c, std::size_t n, std::uint64_t seed, double damaging_share) {
  require(!c.empty() && !c.raw_paragraphs().empty(), "synth_edits: corpus needs articles and a raw pool");
  std::map<std::string, std::string> pool_category;
  for (const auto& a : c.pool_articles()) pool_category[a.id] = a.category_tags.empty() ? "" : a.category_tags[0];
  std::map<std::string, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < c.raw_paragraphs().size(); ++i) {
    by_category[pool_category[c.raw_paragraphs()[i].source_id]].push_back(i);
  }
  Rng rng(seed);
  std::vector<Edit> out;
  out.reserve(n);
  while (out.size() < n) {
    const Article& a = rng.pick(c.articles());
    const std::string cat = a.category_tags.empty() ? "" : a.category_tags[0];
    Edit e;
    e.before = a;
    std::string text;
    if (!rng.bernoulli(damaging_share)) {
      auto it = by_category.find(cat);
      if (it == by_category.end()) continue;
      e.kind = EditKind::kLegitimate;
      text = c.raw_paragraphs()[rng.pick(it->second)].paragraph.text();
    } else {
      const double u = rng.uniform();
      if (u < 0.3) {
        e.kind = EditKind::kBlocklist;
      } else if (u < 0.55) {
        e.kind = EditKind::kGibberish;
      } else if (u < 0.8) {
        e.kind = EditKind::kSpam;
      } else {
        e.kind = EditKind::kOffTopic;
      }
      if (e.kind == EditKind::kOffTopic) {
        const auto& r = rng.pick(c.raw_paragraphs());
        if (pool_category[r.source_id] == cat) continue;
        text = r.paragraph.text();
      } else {
        text = vandal_text(e.kind, rng);
      }
    }
    e.after = apply_revision(a, Paragraph(text), rng.index(a.paragraphs.size()));
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace wikiseo::corpus
