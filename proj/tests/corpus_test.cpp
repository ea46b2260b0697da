#include <gtest/gtest.h>

#include <map>
#include <set>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wikiseo/common/error.hpp"
#include "wikiseo/common/random.hpp"
#include "wikiseo/corpus/article.hpp"
#include "wikiseo/corpus/lexicon.hpp"
#include "wikiseo/corpus/synth.hpp"
#include "wikiseo/corpus/text.hpp"

using namespace wikiseo;
using namespace wikiseo::corpus;

namespace {

Article make(const std::string& id, std::vector<std::string> paras) {
  Article a;
  a.id = id;
  a.title = id;
  for (auto& p : paras) a.paragraphs.emplace_back(p);
  return a;
}

std::string dump(const Corpus& c) {
  std::ostringstream os;
  write_corpus(c, os);
  return os.str();
}

}  // namespace

TEST(Text, TokenizerKeepsHyphenatedNames) {
  EXPECT_EQ(tokenize("Co-trimoxazole, sold in the U.S."),
            (std::vector<std::string>{"co-trimoxazole", "sold", "in", "the", "u", "s"}));
  EXPECT_EQ(tokenize("a -- b- -c"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_TRUE(tokenize("  ,;  ").empty());
}

TEST(Text, TokenSpansPointIntoSource) {
  const std::string s = "Hello, Wide-World 42!";
  for (const auto& t : tokenize_spans(s)) EXPECT_EQ(to_lower(s.substr(t.begin, t.end - t.begin)), t.text);
}

TEST(Text, SentenceSplitterRespectsAbbreviations) {
  auto s = split_sentences("Dr. Smith treats pain. It works! Does it? yes. Approx. Ten.");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0], "Dr. Smith treats pain.");
  EXPECT_EQ(s[1], "It works!");
  EXPECT_EQ(s[2], "Does it? yes.");
  EXPECT_EQ(s[3], "Approx. Ten.");
}

TEST(Text, SentencesConcatenateToText) {
  auto vocab = build_vocabulary();
  auto c = synth_corpus(3, 20, vocab);
  for (const auto& a : c.articles()) {
    for (const auto& p : a.paragraphs) {
      std::string joined;
      for (const auto& s : p.sentences()) joined += (joined.empty() ? "" : " ") + s;
      EXPECT_EQ(joined, p.text());
      EXPECT_EQ(tokenize(p.text()), p.tokens());
    }
  }
}

TEST(Paragraph, RejectsBlankText) { EXPECT_THROW(Paragraph("   \n"), IntegrityError); }

TEST(Corpus, LoadsTwoWellFormedArticles) {
  std::istringstream is(
      R"({"id":"a","title":"A","category_tags":["x"],"paragraphs":["One. Two.","Three."]})"
      "\n"
      R"({"id":"b","title":"B","category_tags":[],"paragraphs":["Four.","Five."]})"
      "\n");
  Corpus c = read_corpus(is);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.at("a").paragraphs[0].sentences().size(), 2u);
}

TEST(Corpus, SingleParagraphArticleIsIntegrityError) {
  std::istringstream is(R"({"id":"a","title":"A","category_tags":[],"paragraphs":["Only one."]})"
                        "\n");
  EXPECT_THROW(read_corpus(is), IntegrityError);
}

TEST(Corpus, DuplicateIdIsIntegrityError) {
  std::istringstream is(R"({"id":"a","title":"A","category_tags":[],"paragraphs":["x.","y."]})"
                        "\n"
                        R"({"id":"a","title":"A","category_tags":[],"paragraphs":["x.","y."]})"
                        "\n");
  EXPECT_THROW(read_corpus(is), IntegrityError);
}

TEST(Corpus, MalformedRecordNamesLine) {
  std::istringstream is(R"({"id":"a","title":"A","category_tags":[],"paragraphs":["x.","y."]})"
                        "\n{broken\n");
  try {
    read_corpus(is);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Corpus, FiveHundredArticleRoundTripIsByteIdentical) {
  auto vocab = build_vocabulary();
  Corpus c = synth_corpus(11, 500, vocab);
  const std::string bytes = dump(c);
  std::istringstream is(bytes);
  Corpus back = read_corpus(is);
  EXPECT_TRUE(back == c);
  EXPECT_EQ(dump(back), bytes);
  EXPECT_EQ(back.raw_paragraphs().size(), c.raw_paragraphs().size());
}

TEST(Corpus, LeadParagraphIsFirstParagraphOfSourceRecord) {
  auto vocab = build_vocabulary();
  const std::string bytes = dump(synth_corpus(5, 40, vocab));
  std::istringstream is(bytes);
  Corpus c = read_corpus(is);
  std::istringstream raw(bytes);
  std::string line;
  while (std::getline(raw, line)) {
    auto j = nlohmann::json::parse(line);
    if (j.contains("role")) continue;
    EXPECT_EQ(lead_paragraph(c.at(j["id"])).text(), j["paragraphs"][0].get<std::string>());
  }
}

TEST(Revision, InsertsBetweenNeighbours) {
  Article a = make("a", {"A.", "B."});
  Article r = apply_revision(a, Paragraph("X."), 0);
  ASSERT_EQ(r.paragraphs.size(), 3u);
  EXPECT_EQ(r.paragraphs[1].text(), "X.");
  EXPECT_EQ(r.paragraphs[2].text(), "B.");
  EXPECT_EQ(a.paragraphs.size(), 2u);
  EXPECT_TRUE(remove_paragraph(r, 1) == a);
  EXPECT_EQ(inserted_index(a, r), 1u);
  EXPECT_THROW(apply_revision(a, Paragraph("X."), 2), ContractError);
}

TEST(Revision, FuzzPreservesOtherParagraphs) {
  auto vocab = build_vocabulary();
  Corpus c = synth_corpus(9, 30, vocab);
  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const Article& a = rng.pick(c.articles());
    const Paragraph& p = rng.pick(c.raw_paragraphs()).paragraph;
    const std::size_t i = rng.index(a.paragraphs.size());
    Article r = apply_revision(a, p, i);
    ASSERT_EQ(r.paragraphs.size(), a.paragraphs.size() + 1);
    std::vector<std::string> expect, got;
    for (const auto& q : a.paragraphs) expect.push_back(q.text());
    expect.insert(expect.begin() + static_cast<std::ptrdiff_t>(i + 1), p.text());
    for (const auto& q : r.paragraphs) got.push_back(q.text());
    ASSERT_EQ(got, expect);
  }
}

TEST(Synth, DeterministicPerSeed) {
  auto vocab = build_vocabulary();
  EXPECT_EQ(dump(synth_corpus(7, 100, vocab)), dump(synth_corpus(7, 100, vocab)));
  EXPECT_NE(dump(synth_corpus(7, 100, vocab)), dump(synth_corpus(8, 100, vocab)));
  EXPECT_THROW(synth_corpus(7, 9, vocab), ContractError);
}

TEST(Synth, CategoriesHaveHigherInternalTokenOverlap) {
  auto vocab = build_vocabulary();
  Corpus c = synth_corpus(7, 120, vocab);
  std::vector<std::set<std::string>> sets;
  for (const auto& a : c.articles()) {
    std::set<std::string> s;
    for (const auto& p : a.paragraphs) s.insert(p.tokens().begin(), p.tokens().end());
    sets.push_back(std::move(s));
  }
  double same = 0, cross = 0;
  long n_same = 0, n_cross = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      std::size_t inter = 0;
      for (const auto& t : sets[i]) inter += sets[j].count(t);
      const double jac = static_cast<double>(inter) / static_cast<double>(sets[i].size() + sets[j].size() - inter);
      if (c.articles()[i].category_tags == c.articles()[j].category_tags) {
        same += jac;
        ++n_same;
      } else {
        cross += jac;
        ++n_cross;
      }
    }
  }
  EXPECT_GT(same / static_cast<double>(n_same), cross / static_cast<double>(n_cross));
}

TEST(Synth, CarryEntitiesLinkConsecutiveParagraphs) {
  auto vocab = build_vocabulary();
  Corpus c = synth_corpus(4, 20, vocab);
  for (const auto& a : c.articles()) {
    for (std::size_t i = 0; i + 1 < a.paragraphs.size(); ++i) {
      auto last = tokenize(a.paragraphs[i].sentences().back());
      auto first = tokenize(a.paragraphs[i + 1].sentences().front());
      std::set<std::string> l(last.begin(), last.end());
      bool shared = false;
      for (const auto& t : first) shared |= l.count(t) && !lexicons::stopwords().contains(t);
      EXPECT_TRUE(shared) << a.id << " joint " << i;
    }
  }
}

TEST(Synth, PoolIsDisjointFromIndexedArticles) {
  auto vocab = build_vocabulary();
  Corpus c = synth_corpus(4, 20, vocab);
  EXPECT_EQ(c.pool_articles().size(), 10u);
  for (const auto& r : c.raw_paragraphs()) EXPECT_FALSE(c.contains(r.source_id));
}

TEST(Synth, QueriesAreDistinctDrugNames) {
  auto vocab = build_vocabulary();
  auto q = synth_queries(vocab, 100, 3);
  std::set<std::string> s(q.begin(), q.end());
  EXPECT_EQ(s.size(), 100u);
  for (const auto& x : q) EXPECT_GE(vocab.category_of_drug(x), 0);
}

TEST(Lexicon, LoadSkipsCommentsAndLowercases) {
  const auto path = std::filesystem::temp_directory_path() / "wikiseo_lexicon_test.txt";
  {
    std::ofstream os(path);
    os << "# comment\nSold\n\nmarketed\nsold\n";
  }
  Lexicon l = Lexicon::load(path);
  EXPECT_EQ(l.size(), 2u);
  EXPECT_TRUE(l.contains("sold"));
  std::filesystem::remove(path);
}

TEST(Lexicon, ShippedFilesMatchBuiltIns) {
  const auto dir = std::filesystem::path(WIKISEO_SOURCE_DIR) / "data" / "lexicons";
  const std::vector<std::pair<std::string, const Lexicon*>> pairs = {
      {"stopwords", &lexicons::stopwords()},         {"verbs", &lexicons::verbs()},
      {"promo_keywords", &lexicons::promo_keywords()}, {"geo_gazetteer", &lexicons::geo_gazetteer()},
      {"org_suffixes", &lexicons::org_suffixes()},   {"blocklist", &lexicons::blocklist()}};
  for (const auto& [name, builtin] : pairs) {
    EXPECT_EQ(Lexicon::load(dir / (name + ".txt")).entries(), builtin->entries()) << name;
  }
}
