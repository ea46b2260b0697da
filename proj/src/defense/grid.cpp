#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "wikiseo/common/error.hpp"
#include "wikiseo/common/random.hpp"
#include "wikiseo/corpus/lexicon.hpp"
#include "wikiseo/corpus/text.hpp"
#include "wikiseo/defense/coherence.hpp"

namespace wikiseo::defense {

std::string SentenceChunk::text() const {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

SentenceChunk extract_chunk(const corpus::Paragraph& p, ChunkOrigin which) {
  const auto& s = p.sentences();
  require(!s.empty(), "extract_chunk: paragraph has no sentences");
  SentenceChunk c;
  c.origin = which;
  const std::size_t n = std::min<std::size_t>(2, s.size());
  const std::size_t from = which == ChunkOrigin::kFirst ? 0 : s.size() - n;
  for (std::size_t i = from; i < from + n; ++i) c.sentences.push_back(corpus::trim(s[i]));
  return c;
}

namespace {

bool is_content_word(const std::string& tok) {
  if (tok.size() < 3) return false;
  bool alpha = false;
  for (unsigned char ch : tok) alpha = alpha || std::isalpha(ch);
  return alpha && !corpus::lexicons::stopwords().contains(tok) && !corpus::lexicons::verbs().contains(tok);
}

// Strongest role of each entity in the chunk; insertion order kept in `order`.
void chunk_roles(const SentenceChunk& c, std::map<std::string, Role>& roles, std::vector<std::string>& order) {
  for (const auto& sentence : c.sentences) {
    const auto spans = corpus::tokenize_spans(sentence);
    std::size_t verb = spans.size();
    for (std::size_t j = 0; j < spans.size(); ++j) {
      if (corpus::lexicons::verbs().contains(spans[j].text)) {
        verb = j;
        break;
      }
    }
    for (std::size_t j = 0; j < spans.size(); ++j) {
      if (j == verb) continue;
      const auto& tok = spans[j];
      const bool capital = j > 0 && std::isupper(static_cast<unsigned char>(sentence[tok.begin]));
      if (!capital && !is_content_word(tok.text)) continue;
      const Role r = verb == spans.size() ? Role::kOther : (j < verb ? Role::kSubject : Role::kObject);
      auto [it, inserted] = roles.emplace(tok.text, r);
      if (inserted) {
        order.push_back(tok.text);
      } else if (r < it->second) {
        it->second = r;
      }
    }
  }
}

}  // namespace

EntityGrid entity_grid(const SentenceChunk& former, const SentenceChunk& latter) {
  std::map<std::string, Role> a, b;
  std::vector<std::string> order;
  chunk_roles(former, a, order);
  chunk_roles(latter, b, order);
  EntityGrid g;
  for (const auto& e : order) {
    if (std::find(g.entities.begin(), g.entities.end(), e) != g.entities.end()) continue;
    const Role ra = a.count(e) ? a.at(e) : Role::kAbsent;
    const Role rb = b.count(e) ? b.at(e) : Role::kAbsent;
    g.entities.push_back(e);
    g.roles.push_back({ra, rb});
    ++g.transitions[4 * static_cast<int>(ra) + static_cast<int>(rb)];
  }
  return g;
}

std::vector<CoherenceTriplet> build_triplets(const corpus::Corpus& corpus, std::size_t n, std::uint64_t seed) {
  const auto& arts = corpus.articles();
  require(arts.size() >= 2, "build_triplets: need at least two articles");
  for (const auto& a : arts) require(a.paragraphs.size() >= 2, "build_triplets: article " + a.id + " has < 2 paragraphs");
  Rng rng(seed);
  std::vector<CoherenceTriplet> out;
  out.reserve(n);
  while (out.size() < n) {
    const std::size_t ai = rng.index(arts.size());
    std::size_t bi = rng.index(arts.size() - 1);
    if (bi >= ai) ++bi;
    const auto& a = arts[ai];
    const auto& b = arts[bi];
    const std::size_t j = rng.index(a.paragraphs.size() - 1);
    const std::size_t k = rng.index(b.paragraphs.size());
    CoherenceTriplet t;
    t.anchor_first = rng.bernoulli(0.5);
    if (t.anchor_first) {
      t.anchor = extract_chunk(a.paragraphs[j], ChunkOrigin::kLast);
      t.positive = extract_chunk(a.paragraphs[j + 1], ChunkOrigin::kFirst);
      t.negative = extract_chunk(b.paragraphs[k], ChunkOrigin::kFirst);
    } else {
      t.anchor = extract_chunk(a.paragraphs[j + 1], ChunkOrigin::kFirst);
      t.positive = extract_chunk(a.paragraphs[j], ChunkOrigin::kLast);
      t.negative = extract_chunk(b.paragraphs[k], ChunkOrigin::kLast);
    }
    if (t.positive.text() == t.negative.text()) continue;
    t.article_id = a.id;
    t.paragraph = j;
    t.negative_source = b.id;
    t.negative_paragraph = k;
    out.push_back(std::move(t));
  }
  return out;
}

std::array<CoherenceTriplet, 2> triplets_from_revision(const corpus::Article& before, const corpus::Article& after) {
  const std::size_t at = corpus::inserted_index(before, after);
  require(at >= 1 && at + 1 < after.paragraphs.size(),
          "triplets_from_revision: the inserted paragraph needs paragraphs above and below");
  const auto& above = after.paragraphs[at - 1];
  const auto& inserted = after.paragraphs[at];
  const auto& below = after.paragraphs[at + 1];
  std::array<CoherenceTriplet, 2> out;
  out[0].anchor = extract_chunk(above, ChunkOrigin::kLast);
  out[0].positive = extract_chunk(below, ChunkOrigin::kFirst);
  out[0].negative = extract_chunk(inserted, ChunkOrigin::kFirst);
  out[0].anchor_first = true;
  out[1].anchor = extract_chunk(below, ChunkOrigin::kFirst);
  out[1].positive = extract_chunk(above, ChunkOrigin::kLast);
  out[1].negative = extract_chunk(inserted, ChunkOrigin::kLast);
  out[1].anchor_first = false;
  for (auto& t : out) {
    t.article_id = before.id;
    t.paragraph = at - 1;
    t.negative_source = "inserted";
    t.negative_paragraph = at;
  }
  return out;
}

namespace {

nlohmann::ordered_json chunk_json(const SentenceChunk& c) {
  return {{"origin", c.origin == ChunkOrigin::kFirst ? "first" : "last"}, {"sentences", c.sentences}};
}

SentenceChunk chunk_from(const nlohmann::json& j) {
  SentenceChunk c;
  const std::string origin = j.at("origin");
  if (origin != "first" && origin != "last") throw ParseError("unknown chunk origin " + origin);
  c.origin = origin == "first" ? ChunkOrigin::kFirst : ChunkOrigin::kLast;
  c.sentences = j.at("sentences").get<std::vector<std::string>>();
  if (c.sentences.empty() || c.sentences.size() > 2) throw ParseError("chunk must hold one or two sentences");
  return c;
}

}  // namespace

void write_triplets(const std::vector<CoherenceTriplet>& triplets, std::ostream& os) {
  for (const auto& t : triplets) {
    nlohmann::ordered_json j = {{"article", t.article_id},
                                {"paragraph", t.paragraph},
                                {"negative_source", t.negative_source},
                                {"negative_paragraph", t.negative_paragraph},
                                {"anchor_first", t.anchor_first},
                                {"anchor", chunk_json(t.anchor)},
                                {"positive", chunk_json(t.positive)},
                                {"negative", chunk_json(t.negative)}};
    os << j.dump() << '\n';
  }
}

std::vector<CoherenceTriplet> read_triplets(std::istream& is) {
  std::vector<CoherenceTriplet> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CoherenceTriplet t;
      t.article_id = j.at("article");
      t.paragraph = j.at("paragraph");
      t.negative_source = j.at("negative_source");
      t.negative_paragraph = j.at("negative_paragraph");
      t.anchor_first = j.at("anchor_first");
      t.anchor = chunk_from(j.at("anchor"));
      t.positive = chunk_from(j.at("positive"));
      t.negative = chunk_from(j.at("negative"));
      out.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("triplet line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("triplet line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace wikiseo::defense
