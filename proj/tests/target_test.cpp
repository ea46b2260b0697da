#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "wikiseo/common/error.hpp"
#include "wikiseo/corpus/edits.hpp"
#include "wikiseo/corpus/synth.hpp"
#include "wikiseo/corpus/text.hpp"
#include "wikiseo/target/features.hpp"
#include "wikiseo/target/local_wiki.hpp"

using namespace wikiseo;
using namespace wikiseo::target;
using corpus::Article;
using corpus::Paragraph;

namespace {

Article make(const std::string& id, std::vector<std::string> paras) {
  Article a;
  a.id = id;
  a.title = id;
  for (auto& p : paras) a.paragraphs.emplace_back(p);
  return a;
}

std::vector<Article> toy() {
  return {make("d1", {"Fentanyl is an opioid.", "Fentanyl is potent."}),
          make("d2", {"Morphine is an opioid.", "It relieves pain."}),
          make("d3", {"Fentanyl patches exist.", "They are used for chronic pain in adults."})};
}

std::string dump(const SearchIndex& idx) {
  std::ostringstream os;
  idx.write(os);
  return os.str();
}

struct World {
  corpus::Vocabulary vocab = corpus::build_vocabulary();
  corpus::Corpus c = corpus::synth_corpus(21, 200, vocab);
  embed::WordVectorTable table = [this] {
    embed::WordVectorTable t(vocab.spec.dimension);
    for (const auto& [tok, v] : corpus::synth_word_vectors(vocab)) t.add(tok, Eigen::Map<const embed::Vec>(v.data(), 50));
    return t;
  }();
  std::shared_ptr<embed::MeanPoolEncoder> encoder = std::make_shared<embed::MeanPoolEncoder>(table);
  std::vector<corpus::Edit> edits = corpus::synth_edits(c, 1200, 5);
  DetectorTraining trained = train_target_detector(edit_dataset(edits, *encoder), {}, 3);
};

World& world() {
  static World w;
  return w;
}

}  // namespace

TEST(Bm25, DocumentFrequencyCountsDocuments) {
  auto idx = SearchIndex::build({make("a", {"x y.", "z."}), make("b", {"x x.", "w."})});
  EXPECT_EQ(idx.document_frequency("x"), 2);
  EXPECT_EQ(idx.document_frequency("w"), 1);
  EXPECT_EQ(idx.document_frequency("nope"), 0);
}

TEST(Bm25, MatchesHandComputedReference) {
  // idf = ln(1 + (3 - 2 + 0.5) / (2 + 0.5)) = ln 1.6, avgdl = 25 / 3
  auto idx = SearchIndex::build(toy());
  EXPECT_NEAR(idx.score("fentanyl", "d1"), 0.6767067960, 1e-6);
  EXPECT_NEAR(idx.score("fentanyl", "d3"), 0.4155980644, 1e-6);
  EXPECT_EQ(idx.score("fentanyl", "d2"), 0.0);
  EXPECT_THROW(idx.score("fentanyl", "nope"), LookupError);
}

TEST(Bm25, RepeatedQueryTermDoublesContribution) {
  auto idx = SearchIndex::build(toy());
  for (const char* id : {"d1", "d2", "d3"}) {
    EXPECT_NEAR(idx.score("fentanyl fentanyl", id), 2 * idx.score("fentanyl", id), 1e-12);
    EXPECT_NEAR(idx.score("fentanyl pain", id), idx.score("fentanyl", id) + idx.score("pain", id), 1e-12);
  }
}

TEST(Bm25, BuildRejectsBadInput) {
  EXPECT_THROW(SearchIndex::build(std::vector<Article>{}), ContractError);
  EXPECT_THROW(SearchIndex::build(toy(), {0.0, 0.75}), ContractError);
  EXPECT_THROW(SearchIndex::build(toy(), {1.2, 1.5}), ContractError);
}

TEST(Bm25, DumpIsDeterministicAndRoundTrips) {
  auto& w = world();
  auto a = SearchIndex::build(w.c), b = SearchIndex::build(w.c);
  EXPECT_EQ(dump(a), dump(b));
  std::istringstream is(dump(a));
  auto back = SearchIndex::read(is);
  EXPECT_EQ(dump(back), dump(a));
  EXPECT_EQ(back.scores({"the", "patients"}), a.scores({"the", "patients"}));
}

TEST(Bm25, RevisionChangesOnlyThatArticlesPostings) {
  auto& w = world();
  std::vector<Article> arts = w.c.articles();
  auto before = SearchIndex::build(arts);
  const std::size_t d = 17;
  arts[d] = corpus::apply_revision(arts[d], w.c.raw_paragraphs()[3].paragraph, 0);
  auto after = SearchIndex::build(arts);
  for (std::size_t i = 0; i < arts.size(); ++i) {
    if (i != d) EXPECT_EQ(before.length(i), after.length(i));
  }
  EXPECT_GT(after.length(d), before.length(d));
  std::set<std::string> tokens;
  for (const auto& [t, _] : before.postings()) tokens.insert(t);
  for (const auto& [t, _] : after.postings()) tokens.insert(t);
  auto strip = [&](const SearchIndex& idx, const std::string& t) {
    std::vector<std::pair<std::uint32_t, int>> out;
    auto it = idx.postings().find(t);
    if (it != idx.postings().end()) {
      for (const auto& p : it->second) {
        if (p.first != d) out.push_back(p);
      }
    }
    return out;
  };
  for (const auto& t : tokens) EXPECT_EQ(strip(before, t), strip(after, t)) << t;
}

TEST(Bm25, OverlayEqualsFullRebuild) {
  auto& w = world();
  auto base = std::make_shared<SearchIndex>(SearchIndex::build(w.c));
  LocalWiki wiki(base, nullptr, nullptr);
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Article> arts = w.c.articles();
    const std::size_t d = rng.index(arts.size());
    arts[d] = corpus::apply_revision(arts[d], rng.pick(w.c.raw_paragraphs()).paragraph, 0);
    auto rebuilt = SearchIndex::build(arts);
    auto edited = wiki.with_edit(arts[d]);
    const std::string q = corpus::to_lower(rng.pick(w.vocab.all_drugs()));
    for (std::size_t i = 0; i < arts.size(); i += 7) {
      EXPECT_NEAR(edited->score(q, arts[i].id), rebuilt.score(q, arts[i].id), 1e-12);
    }
    EXPECT_EQ(edited->rank_of(q, arts[d].id), rebuilt.rank_of(q, arts[d].id));
  }
}

TEST(Search, FullCorpusWhenKExceedsSize) {
  auto idx = SearchIndex::build(toy());
  auto r = idx.search("fentanyl", 10);
  ASSERT_EQ(r.size(), 3u);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i].rank, static_cast<int>(i + 1));
  EXPECT_EQ(r[0].article_id, "d1");
  EXPECT_EQ(r[2].article_id, "d2");
  EXPECT_THROW(idx.search("fentanyl", 0), ContractError);
}

TEST(Search, MoreOccurrencesRankHigher) {
  std::string ten, one = "fentanyl";
  for (int i = 0; i < 10; ++i) ten += "fentanyl ";
  std::string filler = "word word word word word word word word word";
  auto idx = SearchIndex::build({make("b", {ten + ".", "x."}), make("a", {one + " " + filler + ".", "x."}),
                                 make("c", {"other.", "x."})});
  auto r = idx.search("fentanyl", 3);
  EXPECT_EQ(r[0].article_id, "b");
  EXPECT_GT(r[0].score, r[1].score);
}

TEST(Search, EqualsBruteForceSortByScore) {
  auto& w = world();
  auto idx = SearchIndex::build(w.c);
  for (const auto& q : corpus::synth_queries(w.vocab, 20, 2)) {
    std::vector<std::pair<double, std::string>> all;
    for (const auto& a : w.c.articles()) all.emplace_back(idx.score(q, a.id), a.id);
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
      return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    auto r = idx.search(q, w.c.size());
    ASSERT_EQ(r.size(), all.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_EQ(r[i].article_id, all[i].second);
      EXPECT_EQ(r[i].score, all[i].first);
      if (i) EXPECT_LE(r[i].score, r[i - 1].score);
      auto rank = idx.rank_of(q, r[i].article_id);
      if (r[i].score > 0) {
        EXPECT_EQ(rank, r[i].rank);
      } else {
        EXPECT_FALSE(rank.has_value());
      }
    }
  }
}

TEST(Search, AddingQueryOccurrenceAtFixedLengthNeverLowersScore) {
  auto& w = world();
  Rng rng(12);
  const std::string q = w.c.articles()[0].paragraphs[0].tokens()[0];
  std::vector<Article> arts(w.c.articles().begin(), w.c.articles().begin() + 30);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = rng.index(arts.size());
    // swap one non-query token for the query token; document length is unchanged
    std::vector<std::string> paras;
    for (const auto& p : arts[d].paragraphs) paras.push_back(corpus::join_tokens(p.tokens()) + ".");
    auto toks = arts[d].paragraphs[1].tokens();
    const std::size_t pos = rng.index(toks.size());
    if (toks[pos] == q) continue;
    toks[pos] = q;
    paras[1] = corpus::join_tokens(toks) + ".";
    std::vector<Article> base = arts;
    base[d] = make(arts[d].id, {paras[0], corpus::join_tokens(arts[d].paragraphs[1].tokens()) + "."});
    for (std::size_t i = 2; i < arts[d].paragraphs.size(); ++i) base[d].paragraphs.push_back(arts[d].paragraphs[i]);
    Article swapped = base[d];
    swapped.paragraphs[1] = Paragraph(paras[1]);
    const double s0 = SearchIndex::build(base).score(q, arts[d].id);
    std::vector<Article> next = base;
    next[d] = swapped;
    const double s1 = SearchIndex::build(next).score(q, arts[d].id);
    EXPECT_GE(s1, s0 - 1e-12);
    EXPECT_GE(s0, 0.0);
  }
}

TEST(Gbdt, SeparableDataHasHighHeldOutF1) {
  Rng rng(3);
  std::vector<LabeledFeatures> rows;
  for (int i = 0; i < 600; ++i) {
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform(-1, 1);
    rows.push_back({x, 0.7 * x[0] - 0.4 * x[2] + 0.1 > 0});
  }
  auto t = train_target_detector(rows, {}, 1);
  EXPECT_GE(t.held_out.f1, 0.95);
}

TEST(Gbdt, RowOrderDoesNotChangeModel) {
  Rng rng(9);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 300; ++i) {
    x.push_back({rng.uniform(), rng.uniform(), std::floor(rng.uniform() * 4)});
    y.push_back(x.back()[0] + 0.3 * x.back()[2] > 0.9);
  }
  auto a = Gbdt::fit(x, y, {});
  std::vector<std::size_t> perm(x.size());
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  std::vector<std::vector<double>> px;
  std::vector<int> py;
  for (auto i : perm) {
    px.push_back(x[i]);
    py.push_back(y[i]);
  }
  auto b = Gbdt::fit(px, py, {});
  for (const auto& row : x) EXPECT_EQ(a.probability(row), b.probability(row));
}

TEST(Gbdt, IdenticalFeaturesPredictClassPrior) {
  std::vector<std::vector<double>> x(200, std::vector<double>{1.0, 2.0});
  std::vector<int> y(200, 0);
  for (int i = 0; i < 60; ++i) y[static_cast<std::size_t>(i)] = 1;
  auto m = Gbdt::fit(x, y, {});
  EXPECT_NEAR(m.probability({1.0, 2.0}), 0.3, 1e-9);
}

TEST(Gbdt, SingleClassIsTrainingError) {
  std::vector<LabeledFeatures> rows(150, {{1.0, 2.0}, false});
  EXPECT_THROW(train_target_detector(rows), TrainingError);
  std::vector<LabeledFeatures> few(50, {{1.0}, false});
  few[0].damaging = true;
  EXPECT_THROW(train_target_detector(few), TrainingError);
}

TEST(Detector, FeaturesAreFiniteAndRatiosBounded) {
  auto& w = world();
  for (const auto& e : w.edits) {
    auto f = edit_features(e.before, e.after, *w.encoder);
    ASSERT_EQ(f.size(), kEditFeatureCount);
    for (double v : f) EXPECT_TRUE(std::isfinite(v));
    for (std::size_t i : {2u, 3u, 4u, 8u, 9u}) {
      EXPECT_GE(f[i], 0.0);
      EXPECT_LE(f[i], 1.0);
    }
  }
}

TEST(Detector, HeldOutQualityOnSynthesisedEdits) {
  EXPECT_GE(world().trained.held_out.f1, 0.9);
}

TEST(Detector, FlagsBlocklistParagraph) {
  auto& w = world();
  const Article& a = w.c.articles()[3];
  Article after = corpus::apply_revision(a, Paragraph("Stupid crap idiot sucks lol garbage moron scam loser dumb."), 1);
  EXPECT_TRUE(w.trained.detector.detect(a, after, *w.encoder).damaging);
}

TEST(Detector, CopiedParagraphIsWellFormed) {
  auto& w = world();
  const Article& a = w.c.articles()[5];
  Article after = corpus::apply_revision(a, a.paragraphs[1], 0);
  auto v = w.trained.detector.detect(a, after, *w.encoder);
  EXPECT_GE(v.damaging_probability, 0.0);
  EXPECT_LE(v.damaging_probability, 1.0);
}

TEST(Detector, VerdictMatchesThreshold) {
  auto& w = world();
  auto edits = corpus::synth_edits(w.c, 1000, 77);
  for (const auto& e : edits) {
    auto v = w.trained.detector.detect(e.before, e.after, *w.encoder);
    EXPECT_EQ(v.damaging, v.damaging_probability >= 0.5);
  }
}

TEST(Detector, RejectsNonInsertionDiff) {
  auto& w = world();
  const Article& a = w.c.articles()[0];
  EXPECT_THROW(w.trained.detector.detect(a, a, *w.encoder), ContractError);
}

TEST(Detector, DumpRoundTrips) {
  auto& w = world();
  std::ostringstream os;
  w.trained.detector.write(os);
  std::istringstream is(os.str());
  auto back = VandalismDetector::read(is);
  std::ostringstream again;
  back.write(again);
  EXPECT_EQ(again.str(), os.str());
  for (const auto& e : w.edits) {
    auto f = edit_features(e.before, e.after, *w.encoder);
    EXPECT_EQ(back.verdict(f).damaging_probability, w.trained.detector.verdict(f).damaging_probability);
  }
}

TEST(LocalWiki, ServesSearchAndDetection) {
  auto& w = world();
  auto wiki = LocalWiki(std::make_shared<SearchIndex>(SearchIndex::build(w.c)),
                        std::make_shared<VandalismDetector>(w.trained.detector), w.encoder);
  const std::string q = corpus::to_lower(w.vocab.categories[0].drugs[0]);
  auto top = wiki.search(q, 5);
  ASSERT_FALSE(top.empty());
  EXPECT_EQ(wiki.rank_of(q, top[0].article_id), 1);
  EXPECT_THROW(wiki.with_edit(make("missing", {"a.", "b."})), LookupError);
}
