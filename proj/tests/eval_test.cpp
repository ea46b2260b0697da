#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "wikiseo/common/error.hpp"
#include "wikiseo/common/random.hpp"
#include "wikiseo/corpus/synth.hpp"
#include "wikiseo/corpus/text.hpp"
#include "wikiseo/eval/config.hpp"
#include "wikiseo/eval/metrics.hpp"
#include "wikiseo/eval/pipeline.hpp"

namespace fs = std::filesystem;
using namespace wikiseo;
using adversary::Revision;
using adversary::Thresholds;

namespace {

embed::WordVectorTable synth_table() {
  embed::WordVectorTable t(50);
  for (const auto& [tok, v] : corpus::synth_word_vectors(corpus::build_vocabulary())) {
    t.add(tok, Eigen::Map<const embed::Vec>(v.data(), 50));
  }
  return t;
}

const embed::WordVectorTable& table() {
  static const auto t = synth_table();
  return t;
}

const corpus::Corpus& small_corpus() {
  static const auto c = corpus::synth_corpus(3, 120, corpus::build_vocabulary());
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("wikiseo_eval_test_" + name);
  fs::remove_all(p);
  return p;
}

Revision revision(int before, int after, bool damaging, double topic, double neighbor) {
  Revision r;
  r.method = "mawseo";
  r.query = "q";
  r.article_id = "a";
  r.rank_before = before;
  r.rank_after = after;
  r.target_damaging = damaging;
  r.topic_similarity = topic;
  r.neighbor_similarity = neighbor;
  return r;
}

// 50 revisions from a fixed generator, with objectives spread evenly.
std::vector<Revision> revision_log() {
  Rng rng(5);
  std::vector<Revision> out;
  for (int i = 0; i < 50; ++i) {
    const int before = 2 + static_cast<int>(rng.index(450));
    const int after = rng.bernoulli(0.1) ? 0 : 1 + static_cast<int>(rng.index(500));
    out.push_back(revision(before, after, rng.bernoulli(0.3), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)));
  }
  return out;
}

}  // namespace

// ---- thresholds

TEST(Thresholds, IdenticalParagraphsGiveOne) {
  corpus::Corpus c;
  for (int i = 0; i < 4; ++i) {
    const std::string text = "Aspirin relieves pain in adults. Doses vary by weight.";
    c.add({"a" + std::to_string(i), "A", {corpus::Paragraph(text), corpus::Paragraph(text), corpus::Paragraph(text)}, {}});
  }
  embed::MeanPoolEncoder enc(table());
  const auto t = eval::compute_thresholds(c, enc, 4, 1);
  EXPECT_NEAR(t.topic, 1.0, 1e-12);
  EXPECT_NEAR(t.consistency, 1.0, 1e-12);
  EXPECT_EQ(t.sample, 4u);
}

TEST(Thresholds, MatchesTwoPassRecomputation) {
  const auto& c = small_corpus();
  embed::MeanPoolEncoder enc(table());
  const auto t = eval::compute_thresholds(c, enc, 60, 9);

  // Recover the sample with the same shuffle, then average in two passes.
  std::vector<std::size_t> order(c.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(9);
  rng.shuffle(order);
  order.resize(60);
  std::vector<std::vector<embed::Vec>> vecs;
  for (auto i : order) {
    std::vector<embed::Vec> v;
    for (const auto& p : c.articles()[i].paragraphs) v.push_back(enc.encode_text(p.text()).v);
    vecs.push_back(v);
  }
  std::vector<double> topic, cons;
  for (const auto& v : vecs) {
    std::vector<double> s;
    for (std::size_t k = 1; k < v.size(); ++k) s.push_back(v[k].dot(v[0]) / (v[k].norm() * v[0].norm()));
    double sum = 0;
    for (double x : s) sum += x;
    topic.push_back(sum / static_cast<double>(s.size()));
    if (v.size() < 3) continue;
    std::vector<double> n;
    for (std::size_t k = 1; k + 1 < v.size(); ++k) {
      n.push_back((v[k].dot(v[k - 1]) / (v[k].norm() * v[k - 1].norm()) +
                   v[k].dot(v[k + 1]) / (v[k].norm() * v[k + 1].norm())) / 2);
    }
    sum = 0;
    for (double x : n) sum += x;
    cons.push_back(sum / static_cast<double>(n.size()));
  }
  double ts = 0, cs = 0;
  for (double x : topic) ts += x;
  for (double x : cons) cs += x;
  EXPECT_NEAR(t.topic, ts / static_cast<double>(topic.size()), 1e-9);
  EXPECT_NEAR(t.consistency, cs / static_cast<double>(cons.size()), 1e-9);
}

TEST(Thresholds, SeededAndTaggedWithCorpus) {
  const auto& c = small_corpus();
  embed::MeanPoolEncoder enc(table());
  const auto a = eval::compute_thresholds(c, enc, 50, 4);
  const auto b = eval::compute_thresholds(c, enc, 50, 4);
  EXPECT_EQ(a.topic, b.topic);
  EXPECT_EQ(a.consistency, b.consistency);
  EXPECT_EQ(a.corpus_id, eval::corpus_fingerprint(c));
  EXPECT_EQ(a.corpus_id.size(), 16u);
  EXPECT_THROW(eval::compute_thresholds(c, enc, c.size() + 1, 4), ContractError);
}

// ---- metrics

TEST(Metrics, AllObjectivesMet) {
  std::vector<Revision> revs(4, revision(50, 10, false, 0.9, 0.9));
  const auto m = eval::compute_metrics(revs, {0.5, 0.5});
  EXPECT_EQ(m.rank_boosting_rate, 1.0);
  EXPECT_EQ(m.evasion_rate, 1.0);
  EXPECT_EQ(m.topic_relevancy_rate, 1.0);
  EXPECT_EQ(m.semantic_consistency_rate, 1.0);
  EXPECT_EQ(m.promotion_success_rate, 1.0);
}

TEST(Metrics, OneEvasionFailure) {
  std::vector<Revision> revs(4, revision(50, 10, false, 0.9, 0.9));
  revs[2].target_damaging = true;
  const auto m = eval::compute_metrics(revs, {0.5, 0.5});
  EXPECT_EQ(m.evasion_rate, 0.75);
  EXPECT_EQ(m.promotion_success_rate, 0.75);
  EXPECT_EQ(m.rank_boosting_rate, 1.0);
  EXPECT_EQ(m.topic_relevancy_rate, 1.0);
  EXPECT_EQ(m.semantic_consistency_rate, 1.0);
}

TEST(Metrics, StoredFlagsIgnored) {
  auto r = revision(50, 60, true, 0.1, 0.1);
  r.boosted = r.evaded = r.on_topic = r.consistent = true;
  const auto m = eval::compute_metrics({r}, {0.5, 0.5});
  EXPECT_EQ(m.succeeded, 0u);
  EXPECT_EQ(m.boosted, 0u);
}

TEST(Metrics, MatchesBruteForceRecount) {
  const auto log = revision_log();
  const Thresholds t{0.4, 0.55};
  const auto m = eval::compute_metrics(log, t);
  int b = 0, e = 0, tp = 0, c = 0, s = 0;
  for (const auto& r : log) {
    const bool bb = r.rank_after != 0 && r.rank_after < r.rank_before;
    const bool ee = !r.target_damaging;
    const bool tt = r.topic_similarity >= 0.4;
    const bool cc = r.neighbor_similarity >= 0.55;
    b += bb, e += ee, tp += tt, c += cc, s += bb && ee && tt && cc;
  }
  EXPECT_EQ(m.count, 50u);
  EXPECT_EQ(m.rank_boosting_rate, b / 50.0);
  EXPECT_EQ(m.evasion_rate, e / 50.0);
  EXPECT_EQ(m.topic_relevancy_rate, tp / 50.0);
  EXPECT_EQ(m.semantic_consistency_rate, c / 50.0);
  EXPECT_EQ(m.promotion_success_rate, s / 50.0);
  EXPECT_GT(s, 0);
}

TEST(Metrics, ConjunctionBound) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Revision> revs;
    const auto n = 1 + rng.index(30);
    for (std::size_t i = 0; i < n; ++i) {
      revs.push_back(revision(2 + static_cast<int>(rng.index(300)), static_cast<int>(rng.index(300)),
                              rng.bernoulli(0.5), rng.uniform(0, 1), rng.uniform(0, 1)));
    }
    const auto m = eval::compute_metrics(revs, {rng.uniform(0, 1), rng.uniform(0, 1)});
    const double lo = std::min({m.rank_boosting_rate, m.evasion_rate, m.topic_relevancy_rate,
                                m.semantic_consistency_rate});
    ASSERT_LE(m.promotion_success_rate, lo);
  }
}

TEST(Metrics, EmptyIsContractError) { EXPECT_THROW(eval::compute_metrics({}, {0, 0}), ContractError); }

// ---- rank levels

TEST(RankLevels, SingleBucket) {
  const auto levels = eval::rank_level_report({revision(20, 5, false, 1, 1), revision(80, 90, false, 1, 1)});
  ASSERT_EQ(levels.size(), 1u);
  EXPECT_EQ(levels[0].first_rank, 2);
  EXPECT_EQ(levels[0].last_rank, 100);
  EXPECT_EQ(levels[0].count, 2u);
  EXPECT_EQ(levels[0].boosting_rate, 0.5);
  EXPECT_EQ(levels[0].mean_margin, 15.0);
}

TEST(RankLevels, MatchesBruteForceBuckets) {
  const auto log = revision_log();
  const auto levels = eval::rank_level_report(log);
  std::map<int, std::vector<const Revision*>> buckets;
  for (const auto& r : log) buckets[(r.rank_before - 1) / 100].push_back(&r);
  ASSERT_EQ(levels.size(), buckets.size());
  std::size_t i = 0;
  for (const auto& [b, rs] : buckets) {
    double boosted = 0, margin = 0;
    for (const auto* r : rs) {
      if (r->rank_after > 0 && r->rank_after < r->rank_before) {
        ++boosted;
        margin += r->rank_before - r->rank_after;
      }
    }
    const auto& l = levels[i++];
    EXPECT_EQ(l.first_rank, b == 0 ? 2 : 100 * b + 1);
    EXPECT_EQ(l.count, rs.size());
    EXPECT_EQ(l.boosting_rate, boosted / static_cast<double>(rs.size()));
    EXPECT_DOUBLE_EQ(l.mean_margin, boosted ? margin / boosted : 0.0);
  }
}

// ---- keyword stuffing

TEST(KeywordDensity, Arithmetic) {
  EXPECT_DOUBLE_EQ(eval::keyword_density(2, 3, 1200), 0.005);
  // 0.05% -> 0.27% on a one-token keyword is 5 -> 27 repetitions per 10k tokens.
  EXPECT_DOUBLE_EQ(eval::keyword_density(1, 5, 10000), 0.0005);
  EXPECT_DOUBLE_EQ(eval::keyword_density(1, 27, 10000), 0.0027);
  EXPECT_THROW(eval::keyword_density(1, 1, 0), ContractError);
}

TEST(KeywordDensity, PhraseCountIsNonOverlapping) {
  EXPECT_EQ(eval::phrase_count({"a", "a", "a"}, {"a", "a"}), 1u);
  EXPECT_EQ(eval::phrase_count({"x", "a", "b", "a", "b"}, {"a", "b"}), 2u);
  EXPECT_EQ(eval::phrase_count({"a"}, {}), 0u);
}

TEST(KeywordStuff, RecountMatchesRecordedDensity) {
  const auto& c = small_corpus();
  Rng rng(8);
  for (int i = 0; i < 40; ++i) {
    const auto& p = c.raw_paragraphs()[rng.index(c.raw_paragraphs().size())].paragraph;
    const std::string query = i % 2 ? "green tea" : "aspirin";
    const std::size_t T = 300 + rng.index(400);
    const double d = 0.002 + 0.008 * rng.uniform(0, 1);
    std::optional<eval::StuffedParagraph> stuffed;
    try {
      stuffed = eval::keyword_stuff(p, query, d, T, 100 + static_cast<std::uint64_t>(i));
    } catch (const InfeasibleError&) {
      continue;
    }
    const auto& s = *stuffed;
    const auto phrase = corpus::tokenize(query);
    const auto f = eval::phrase_count(s.paragraph.tokens(), phrase);
    EXPECT_EQ(f, s.repetitions);
    EXPECT_DOUBLE_EQ(s.density, eval::keyword_density(phrase.size(), f, T));
    EXPECT_GE(s.density, d - 1e-12);
    // Original words survive in order; only whole phrases were added.
    const auto& toks = s.paragraph.tokens();
    EXPECT_EQ(toks.size(), p.tokens().size() + phrase.size() * (f - eval::phrase_count(p.tokens(), phrase)));
    std::size_t k = 0;
    for (const auto& t : toks) k += k < p.tokens().size() && t == p.tokens()[k];
    EXPECT_EQ(k, p.tokens().size());
  }
}

TEST(KeywordStuff, Deterministic) {
  const auto& p = small_corpus().raw_paragraphs()[0].paragraph;
  const auto a = eval::keyword_stuff(p, "aspirin", 0.01, 500, 3);
  const auto b = eval::keyword_stuff(p, "aspirin", 0.01, 500, 3);
  EXPECT_EQ(a.paragraph.text(), b.paragraph.text());
}

TEST(KeywordStuff, Contracts) {
  const corpus::Paragraph p("Short text here.");
  EXPECT_THROW(eval::keyword_stuff(p, "aspirin", 0.0, 100, 1), ContractError);
  EXPECT_THROW(eval::keyword_stuff(p, "aspirin", 0.06, 100, 1), ContractError);
  EXPECT_THROW(eval::keyword_stuff(p, "aspirin", 0.05, 10000, 1), InfeasibleError);
  const auto s = eval::keyword_stuff(p, "aspirin", 0.01, 100, 1);
  EXPECT_EQ(s.repetitions, 1u);
}

// ---- revenue

TEST(Revenue, Formula) {
  const auto r = eval::estimate_revenue(55479625.0, 0.01, 200.0);
  EXPECT_DOUBLE_EQ(r.revenue, 110959250.0);
  EXPECT_NEAR(r.revenue / 1e6, 110.96, 0.005);
  EXPECT_EQ(eval::estimate_revenue(55479625.0, 0.0, 200.0).revenue, 0.0);
  EXPECT_DOUBLE_EQ(eval::estimate_revenue(2 * 1234.5, 0.02, 7.0).revenue,
                   2 * eval::estimate_revenue(1234.5, 0.02, 7.0).revenue);
  EXPECT_THROW(eval::estimate_revenue(-1.0, 0.01, 1.0), ContractError);
}

TEST(ViewTable, ParsesAndLooksUp) {
  std::istringstream is("rank,views\n# comment\n1,100\n3,50.5\n\n10,7\n");
  const auto t = eval::ViewTable::read(is);
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.views(1), 100.0);
  EXPECT_EQ(t.views(2), 100.0);
  EXPECT_EQ(t.views(3), 50.5);
  EXPECT_EQ(t.views(500), 7.0);
  EXPECT_THROW(t.views(0), ContractError);
}

TEST(ViewTable, ErrorsNameTheLine) {
  std::istringstream bad("1,100\n2,abc\n");
  try {
    eval::ViewTable::read(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::istringstream dup("1,1\n1,2\n");
  EXPECT_THROW(eval::ViewTable::read(dup), ParseError);
  EXPECT_THROW(eval::ViewTable::load("/nonexistent/views.csv"), MissingArtifactError);
}

TEST(ViewTable, ShippedTable) {
  const auto t = eval::ViewTable::load(fs::path(WIKISEO_SOURCE_DIR) / "data" / "views_by_rank.csv");
  EXPECT_EQ(t.views(1), 49467.8);
  EXPECT_EQ(t.size(), 1000u);
  for (int r = 2; r <= 1000; ++r) ASSERT_LE(t.views(r), t.views(r - 1));
}

TEST(ViewTable, RevisionViews) {
  std::istringstream is("1,100\n2,50\n3,10\n");
  const auto t = eval::ViewTable::read(is);
  const auto v = eval::revision_views({revision(3, 1, false, 0, 0), revision(2, 0, false, 0, 0)}, t);
  EXPECT_EQ(v.before, 60.0);
  EXPECT_EQ(v.after, 100.0);
}

// ---- config

TEST(Config, RoundTrip) {
  eval::ExperimentConfig c;
  c.seed = 99;
  c.corpus.articles = 321;
  c.thresholds.topic = 0.25;
  c.retrieval.training.alternating = true;
  c.coherence.model.epochs = 9;
  std::istringstream is(eval::config_json(c));
  const auto back = eval::read_config(is);
  EXPECT_EQ(eval::config_json(back), eval::config_json(c));
  EXPECT_EQ(back.thresholds.topic, 0.25);
  EXPECT_FALSE(back.thresholds.consistency.has_value());
}

TEST(Config, PartialTreeKeepsDefaults) {
  std::istringstream is(R"({"seed": 3, "ranker": {"epochs": 2}})");
  const auto c = eval::read_config(is);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.ranker.model.epochs, 2);
  EXPECT_EQ(c.corpus.articles, eval::ExperimentConfig{}.corpus.articles);
}

TEST(Config, UnknownKeyNamesPath) {
  std::istringstream is(R"({"attack": {"per_bucket": 3, "pool_size": 4}})");
  try {
    eval::read_config(is);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("attack.pool_size"), std::string::npos);
  }
}

TEST(Config, InvalidValues) {
  std::istringstream bad_type(R"({"corpus": {"articles": "many"}})");
  EXPECT_THROW(eval::read_config(bad_type), ParseError);
  std::istringstream bad_share(R"({"split": {"train_share": 1.0}})");
  EXPECT_THROW(eval::read_config(bad_share), ParseError);
  std::istringstream not_json("seed = 4");
  EXPECT_THROW(eval::read_config(not_json), ParseError);
  EXPECT_THROW(eval::load_config("/nonexistent/config.json"), MissingArtifactError);
}

TEST(Config, DeriveSeed) {
  EXPECT_EQ(eval::derive_seed(7, 3, "x"), eval::derive_seed(7, 3, "x"));
  EXPECT_NE(eval::derive_seed(7, 3, "x"), eval::derive_seed(8, 3, "x"));
  EXPECT_NE(eval::derive_seed(7, 3, "x"), eval::derive_seed(7, 4, "x"));
  EXPECT_NE(eval::derive_seed(7, 3, "x"), eval::derive_seed(7, 3, "y"));
}

// ---- pipeline

namespace {

eval::ExperimentConfig tiny_config() {
  std::istringstream is(R"({
    "corpus": {"articles": 300, "queries": 12},
    "target": {"edits": 300, "gbdt": {"trees": 20}},
    "ranker": {"epochs": 1, "per_query": 15, "depth": 100},
    "substitute_detector": {"edits": 200, "epochs": 1},
    "tagger": {"examples": 200, "epochs": 2},
    "retrieval": {"epochs": 1, "pool_cap": 16},
    "attack": {"per_bucket": 2, "depth": 200, "pool_cap": 16},
    "thresholds": {"sample": 100},
    "coherence": {"triplets": 600, "epochs": 1}
  })");
  return eval::read_config(is);
}

}  // namespace

TEST(Pipeline, StageNames) {
  const auto& s = eval::stage_names();
  EXPECT_EQ(s.size(), 12u);
  EXPECT_EQ(s.front(), "synth-corpus");
  EXPECT_EQ(s.back(), "report");
}

TEST(Pipeline, EvalWithoutAttackOutputs) {
  const auto dir = scratch_dir("missing");
  eval::Pipeline p(tiny_config(), dir);
  try {
    p.run("eval");
    FAIL();
  } catch (const MissingArtifactError& e) {
    EXPECT_NE(std::string(e.what()).find("attack"), std::string::npos);
  }
  EXPECT_THROW(p.run("no-such-stage"), LookupError);
  fs::remove_all(dir);
}

TEST(Pipeline, DirectoryBoundToConfig) {
  const auto dir = scratch_dir("bound");
  {
    eval::Pipeline p(tiny_config(), dir);
    p.run("synth-corpus");
  }
  const auto recorded = eval::manifest_config(dir);
  ASSERT_TRUE(recorded.has_value());
  EXPECT_EQ(eval::config_json(*recorded), eval::config_json(tiny_config()));
  auto other = tiny_config();
  other.seed = 8;
  EXPECT_THROW(eval::Pipeline(other, dir), ContractError);
  EXPECT_NO_THROW(eval::Pipeline(tiny_config(), dir));
  fs::remove_all(dir);
}

TEST(Pipeline, TinyRunIsCompleteAndReproducible) {
  const auto dir = scratch_dir("tiny");
  eval::Pipeline p(tiny_config(), dir);
  p.run_all();

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["format_version"], eval::kRunFormatVersion);
  std::set<std::string> stages;
  for (const auto& [name, entry] : manifest["stages"].items()) {
    stages.insert(name);
    for (const auto& f : entry["outputs"]) {
      const auto data = slurp(dir / f["path"].get<std::string>());
      EXPECT_EQ(f["bytes"].get<std::size_t>(), data.size()) << f["path"];
    }
  }
  EXPECT_EQ(stages.size(), eval::stage_names().size());

  // Reports are recomputable from the revision log and thresholds alone.
  std::ifstream rin(dir / "attacks" / "revisions_mawseo.jsonl");
  const auto revs = adversary::read_revisions(rin);
  const auto th = nlohmann::json::parse(slurp(dir / "data" / "thresholds.json"));
  const auto metrics = nlohmann::json::parse(slurp(dir / "reports" / "metrics.json"));
  ASSERT_FALSE(revs.empty());
  const auto m = eval::compute_metrics(revs, {th["topic"].get<double>(), th["consistency"].get<double>()});
  EXPECT_EQ(metrics["methods"]["mawseo"]["promotion_success_rate"].get<double>(), m.promotion_success_rate);
  EXPECT_EQ(metrics["methods"]["mawseo"]["rank_boosting_rate"].get<double>(), m.rank_boosting_rate);
  EXPECT_TRUE(fs::exists(dir / "reports" / "summary.txt"));

  // Rerunning eval leaves its reports byte-identical.
  const std::vector<std::string> files = {"reports/metrics.json", "reports/attack_table.tsv",
                                          "reports/rank_levels.tsv", "reports/revenue.json"};
  std::vector<std::string> before;
  for (const auto& f : files) before.push_back(slurp(dir / f));
  const auto manifest_before = slurp(dir / "manifest.json");
  p.run("eval");
  for (std::size_t i = 0; i < files.size(); ++i) EXPECT_EQ(slurp(dir / files[i]), before[i]) << files[i];
  EXPECT_EQ(slurp(dir / "manifest.json"), manifest_before);

  // A second directory from the same config matches byte for byte.
  const auto dir2 = scratch_dir("tiny2");
  eval::Pipeline(tiny_config(), dir2).run_all();
  EXPECT_EQ(slurp(dir2 / "manifest.json"), manifest_before);
  fs::remove_all(dir);
  fs::remove_all(dir2);
}
