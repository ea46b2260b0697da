#include <gtest/gtest.h>

#include <sstream>

#include "wikiseo/common/error.hpp"
#include "wikiseo/corpus/synth.hpp"
#include "wikiseo/corpus/text.hpp"
#include "wikiseo/injection/inject.hpp"
#include "wikiseo/injection/tagger.hpp"
#include "wikiseo/nn/gradcheck.hpp"

using namespace wikiseo;
using namespace wikiseo::injection;
using corpus::Paragraph;

namespace {

using E = RevisionEntity;

struct Fixture {
  corpus::Vocabulary vocab = corpus::build_vocabulary();
  corpus::Corpus c = corpus::synth_corpus(13, 200, vocab);
  embed::WordVectorTable table = [this] {
    embed::WordVectorTable t(vocab.spec.dimension);
    for (const auto& [tok, v] : corpus::synth_word_vectors(vocab)) t.add(tok, Eigen::Map<const embed::Vec>(v.data(), 50));
    return t;
  }();
  std::vector<std::string> queries = corpus::synth_queries(vocab, 60, 2);
  std::vector<LabeledParagraph> data = heuristic_dataset(c.raw_paragraphs(), vocab.businesses, queries, 300, 4);
};

Fixture& fx() {
  static Fixture f;
  return f;
}

std::size_t count_of(const TagSequence& t, E e) { return static_cast<std::size_t>(std::count(t.begin(), t.end(), e)); }

}  // namespace

TEST(HeuristicLabel, OrganisationNameIsReplacement) {
  InjectionInputs in(Paragraph("Rifaximin is marketed by Salix Pharmaceuticals in the United States."), "ABC Pharmacy",
                     "rifaximin");
  auto tags = heuristic_label(in);
  const auto& toks = in.raw.tokens();
  ASSERT_EQ(tags.size(), toks.size());
  EXPECT_EQ(tags[4], E::kReplacement);  // salix
  EXPECT_EQ(tags[5], E::kReplacement);  // pharmaceuticals
  EXPECT_EQ(tags[8], E::kReplacement);  // united
  EXPECT_EQ(tags[9], E::kReplacement);  // states
  EXPECT_EQ(tags[2], E::kInsertion);    // marketed
  EXPECT_EQ(tags[0], E::kInsertion);    // query term
  EXPECT_EQ(replacement_spans(tags).size(), 2u);
}

TEST(HeuristicLabel, PromotionalKeywordIsInsertion) {
  InjectionInputs in(Paragraph("Sofosbuvir, sold under the brand name Sovaldi, treats hepatitis C."), "ABC Pharmacy", "x");
  auto tags = heuristic_label(in);
  EXPECT_EQ(in.raw.tokens()[1], "sold");
  EXPECT_EQ(tags[1], E::kInsertion);
  EXPECT_EQ(count_of(tags, E::kInsertion), 1u);
  EXPECT_EQ(count_of(tags, E::kReplacement), 0u);
}

TEST(HeuristicLabel, NoCuesMeansAllUnsuitable) {
  InjectionInputs in(Paragraph("The drug lowers blood pressure in most adults."), "ABC Pharmacy", "aspirin");
  auto tags = heuristic_label(in);
  EXPECT_EQ(count_of(tags, E::kUnsuitability), tags.size());
}

TEST(InjectionInputs, RejectsOversizedPromo) {
  EXPECT_THROW(InjectionInputs(Paragraph("x."), "", "q"), ContractError);
  EXPECT_THROW(InjectionInputs(Paragraph("x."), "a b c d e f g h i", "q"), ContractError);
}

TEST(Inject, ReplacesOrganisationSpan) {
  InjectionInputs in(Paragraph("Rifaximin is marketed by Salix Pharmaceuticals."), "ABC Pharmacy", "none");
  TagSequence tags(in.raw.tokens().size(), E::kUnsuitability);
  tags[4] = tags[5] = E::kReplacement;
  EXPECT_EQ(inject(in, tags, 1).text(), "Rifaximin is marketed by ABC Pharmacy.");
}

TEST(Inject, InsertsAdverbPhraseAfterToken) {
  InjectionInputs in(Paragraph("Sofosbuvir, sold under the brand name Sovaldi, treats hepatitis C."), "ABC Pharmacy", "x");
  auto tags = heuristic_label(in);
  EXPECT_EQ(inject(in, tags, 9).text(), "Sofosbuvir, sold in ABC Pharmacy under the brand name Sovaldi, treats hepatitis C.");
}

TEST(Inject, AllUnsuitableIsInfeasible) {
  InjectionInputs in(Paragraph("The drug lowers blood pressure."), "ABC Pharmacy", "x");
  EXPECT_THROW(inject(in, heuristic_label(in), 1), InfeasibleError);
}

TEST(Inject, TokenCountAndPromoOccurrenceInvariants) {
  auto& f = fx();
  int done = 0;
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    const auto& [in, tags] = f.data[i];
    if (count_of(tags, E::kUnsuitability) == tags.size()) continue;
    const auto out = inject(in, tags, i);
    const std::size_t promo_tokens = corpus::tokenize(in.promo).size();
    const std::size_t n = in.raw.tokens().size(), m = out.tokens().size();
    bool matched = false;
    for (const auto& [b, e] : replacement_spans(tags)) matched |= m == n - (e - b) + promo_tokens;
    matched |= m == n + promo_tokens + 1;
    EXPECT_TRUE(matched) << out.text();
    EXPECT_EQ(corpus::count_occurrences(out.text(), in.promo), corpus::count_occurrences(in.raw.text(), in.promo) + 1);
    ++done;
  }
  EXPECT_GT(done, 100);
}

TEST(Inject, SeededChoiceIsDeterministic) {
  auto& f = fx();
  for (const auto& [in, tags] : f.data) {
    if (count_of(tags, E::kUnsuitability) == tags.size()) continue;
    EXPECT_EQ(inject(in, tags, 5).text(), inject(in, tags, 5).text());
  }
}

TEST(Tagger, GradientsMatchFiniteDifferences) {
  auto& f = fx();
  TaggerConfig cfg;
  cfg.hidden = 3;
  cfg.outer_dim = 4;
  Tagger model(f.table, cfg);
  for (auto& p : model.store().all()) {
    Rng rng(fnv1a(p->name));
    for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value(i) += 0.1 * rng.normal();
  }
  std::vector<LabeledParagraph> batch;
  for (const auto& d : f.data) {
    for (const auto& sentence : d.first.raw.sentences()) {
      InjectionInputs in(Paragraph(sentence), d.first.promo, d.first.query);
      TagSequence tags = heuristic_label(in);
      if (batch.size() < 2 && count_of(tags, E::kUnsuitability) < tags.size()) batch.emplace_back(in, tags);
    }
  }
  ASSERT_EQ(batch.size(), 2u);
  auto r = nn::check_gradients(model.store(), [&](nn::Tape& t) {
    return nn::add(model.loss(t, batch[0].first, batch[0].second), model.loss(t, batch[1].first, batch[1].second));
  });
  EXPECT_LT(r.relative_error, 1e-3);
}

TEST(Tagger, MarginalsAreDistributions) {
  auto& f = fx();
  Tagger model(f.table, {});
  for (std::size_t i = 0; i < 20; ++i) {
    auto m = model.marginals(f.data[i].first);
    ASSERT_EQ(m.cols(), kEntityCount);
    for (Eigen::Index r = 0; r < m.rows(); ++r) EXPECT_NEAR(m.row(r).sum(), 1.0, 1e-9);
    EXPECT_EQ(model.tag(f.data[i].first).size(), f.data[i].first.raw.tokens().size());
  }
}

TEST(Tagger, OverfitsMemorisedExamples) {
  auto& f = fx();
  std::vector<LabeledParagraph> few;
  for (const auto& d : f.data) {
    if (count_of(d.second, E::kReplacement) && count_of(d.second, E::kInsertion)) few.push_back(d);
    if (few.size() == 5) break;
  }
  ASSERT_EQ(few.size(), 5u);
  std::vector<LabeledParagraph> repeated;
  for (int k = 0; k < 10; ++k) repeated.insert(repeated.end(), few.begin(), few.end());
  TaggerConfig cfg;
  cfg.epochs = 6;
  Tagger model = train_tagger(repeated, f.table, cfg);
  for (const auto& [in, tags] : few) EXPECT_EQ(model.tag(in), tags);
}

TEST(Tagger, TrainingIsDeterministicAndCheckpointRoundTrips) {
  auto& f = fx();
  std::vector<LabeledParagraph> train(f.data.begin(), f.data.begin() + 120);
  TaggerConfig cfg;
  cfg.epochs = 1;
  Tagger a = train_tagger(train, f.table, cfg);
  Tagger b = train_tagger(train, f.table, cfg);
  std::ostringstream os;
  a.save(os);
  std::istringstream is(os.str());
  Tagger c = Tagger::load(is, f.table);
  for (std::size_t i = 120; i < 160; ++i) {
    const auto& in = f.data[i].first;
    EXPECT_EQ(a.tag(in), b.tag(in));
    EXPECT_EQ(a.tag(in), c.tag(in));
    for (auto t : a.tag(in)) EXPECT_LT(static_cast<int>(t), kEntityCount);
  }
}

TEST(Tagger, RejectsTooFewOrMissingLabels) {
  auto& f = fx();
  std::vector<LabeledParagraph> few(f.data.begin(), f.data.begin() + 10);
  EXPECT_THROW(train_tagger(few, f.table), TrainingError);
  std::vector<LabeledParagraph> flat;
  for (int i = 0; i < 60; ++i) {
    const auto& in = f.data[static_cast<std::size_t>(i)].first;
    flat.emplace_back(in, TagSequence(in.raw.tokens().size(), E::kUnsuitability));
  }
  EXPECT_THROW(train_tagger(flat, f.table), TrainingError);
}

TEST(Tagger, ScoreTagsCountsPositiveClassesOnly) {
  std::vector<TagSequence> gold = {{E::kReplacement, E::kInsertion, E::kUnsuitability}};
  std::vector<TagSequence> pred = {{E::kReplacement, E::kUnsuitability, E::kInsertion}};
  auto s = score_tags(pred, gold);
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.f1, 0.5);
}
