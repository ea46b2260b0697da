#include "wikiseo/eval/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "wikiseo/adversary/attack.hpp"
#include "wikiseo/adversary/detector.hpp"
#include "wikiseo/adversary/ranker.hpp"
#include "wikiseo/adversary/train.hpp"
#include "wikiseo/common/error.hpp"
#include "wikiseo/common/format.hpp"
#include "wikiseo/common/random.hpp"
#include "wikiseo/corpus/edits.hpp"
#include "wikiseo/corpus/synth.hpp"
#include "wikiseo/corpus/text.hpp"
#include "wikiseo/defense/coherence.hpp"
#include "wikiseo/defense/retrain.hpp"
#include "wikiseo/eval/metrics.hpp"
#include "wikiseo/injection/labels.hpp"
#include "wikiseo/injection/tagger.hpp"
#include "wikiseo/retrieval/network.hpp"
#include "wikiseo/target/bm25.hpp"
#include "wikiseo/target/detector.hpp"
#include "wikiseo/target/features.hpp"
#include "wikiseo/target/local_wiki.hpp"

#ifndef WIKISEO_DATA_DIR
#define WIKISEO_DATA_DIR "data"
#endif

namespace wikiseo::eval {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const char* const kSynth = "synth-corpus";
const char* const kIndex = "index";
const char* const kTarget = "train-target-detector";
const char* const kRanker = "distill-ranker";
const char* const kSubDet = "train-substitute-detector";
const char* const kTagger = "train-tagger";
const char* const kRetrieval = "train-retrieval";
const char* const kAttack = "attack";
const char* const kCoherence = "defend-coherence";
const char* const kAdvTrain = "defend-adv-train";
const char* const kEval = "eval";
const char* const kReport = "report";

std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(std::istream& is) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    line = corpus::trim(line);
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

void write_lines(const std::vector<std::string>& lines, std::ostream& os) {
  for (const auto& l : lines) os << l << '\n';
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

ordered_json rates_json(const MetricsReport& m) {
  return {{"count", m.count},
          {"boosted", m.boosted},
          {"evaded", m.evaded},
          {"on_topic", m.on_topic},
          {"consistent", m.consistent},
          {"succeeded", m.succeeded},
          {"rank_boosting_rate", m.rank_boosting_rate},
          {"evasion_rate", m.evasion_rate},
          {"topic_relevancy_rate", m.topic_relevancy_rate},
          {"semantic_consistency_rate", m.semantic_consistency_rate},
          {"promotion_success_rate", m.promotion_success_rate}};
}

ordered_json scores_json(const BinaryScores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"accuracy", s.accuracy}, {"n", s.n}};
}

ordered_json rates_json(const defense::DetectionRates& r) {
  return {{"recall", r.recall},
          {"legitimate_accuracy", r.legitimate_accuracy},
          {"revisions", r.revisions},
          {"legitimate", r.legitimate}};
}

void write_instances(const std::vector<adversary::Instance>& v, std::ostream& os) {
  for (const auto& i : v) {
    ordered_json j = {{"query", i.query}, {"article", i.article_id}, {"rank_before", i.rank_before}, {"promo", i.promo}};
    os << j.dump() << '\n';
  }
}

std::vector<adversary::Instance> read_instances(std::istream& is) {
  std::vector<adversary::Instance> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (corpus::trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("query"), j.at("article"), j.at("rank_before"), j.at("promo")});
    } catch (const json::exception& e) {
      throw ParseError("instances line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_rows(const std::vector<target::LabeledFeatures>& rows, std::ostream& os) {
  os << "damaging";
  for (const auto& name : target::edit_feature_names()) os << '\t' << name;
  os << '\n';
  for (const auto& r : rows) {
    os << (r.damaging ? 1 : 0);
    for (double f : r.features) os << '\t' << format_double(f);
    os << '\n';
  }
}

std::vector<target::LabeledFeatures> read_rows(std::istream& is) {
  std::vector<target::LabeledFeatures> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    if (++n == 1) continue;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    target::LabeledFeatures r;
    std::getline(ls, cell, '\t');
    if (cell != "0" && cell != "1") throw ParseError("target rows line " + std::to_string(n) + ": bad label");
    r.damaging = cell == "1";
    while (std::getline(ls, cell, '\t')) r.features.push_back(parse_double(cell));
    if (r.features.size() != target::kEditFeatureCount) {
      throw ParseError("target rows line " + std::to_string(n) + ": expected " +
                       std::to_string(target::kEditFeatureCount) + " features");
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {kSynth,     kIndex,     kTarget,    kRanker,   kSubDet,
                                                 kTagger,    kRetrieval, kAttack,    kCoherence, kAdvTrain,
                                                 kEval,      kReport};
  return names;
}

std::optional<ExperimentConfig> manifest_config(const fs::path& run_dir) {
  const auto path = run_dir / "manifest.json";
  if (!fs::exists(path)) return std::nullopt;
  const auto j = parse_json(read_file(path), path.string());
  if (!j.contains("config")) throw ParseError(path.string() + ": no config");
  std::istringstream is(j.at("config").dump());
  return read_config(is);
}

struct Pipeline::State {
  ExperimentConfig cfg;
  fs::path dir;
  std::ostream* log = nullptr;

  std::string stage;                  // currently running
  std::vector<std::string> outputs;   // its files, relative
  ordered_json seeds;

  // lazily loaded artifacts
  std::optional<corpus::Vocabulary> vocab_;
  std::optional<corpus::Corpus> corpus_;
  std::optional<std::vector<std::string>> queries_, promos_;
  std::shared_ptr<embed::WordVectorTable> table_;
  std::shared_ptr<embed::MeanPoolEncoder> encoder_;
  std::shared_ptr<target::SearchIndex> index_;
  std::shared_ptr<target::VandalismDetector> detector_;
  std::unique_ptr<target::LocalWiki> wiki_;
  std::optional<std::pair<std::vector<std::string>, std::vector<std::string>>> split_;
  std::unique_ptr<adversary::SubstituteRanker> ranker_;
  std::unique_ptr<injection::Tagger> tagger_;

  std::uint64_t seed(std::uint64_t component, const char* salt) {
    const auto s = derive_seed(cfg.seed, component, salt);
    seeds[salt] = s;
    return s;
  }

  void note(const std::string& msg) const {
    if (log) *log << "[" << stage << "] " << msg << std::endl;
  }

  fs::path need(const std::string& rel, const char* producer) const {
    const auto p = dir / rel;
    if (!fs::exists(p)) {
      throw MissingArtifactError("missing " + rel + " in " + dir.string() + "; run the '" + producer +
                                 "' stage first");
    }
    return p;
  }

  std::ifstream in(const std::string& rel, const char* producer) const {
    std::ifstream is(need(rel, producer), std::ios::binary);
    if (!is) throw MissingArtifactError("cannot open " + (dir / rel).string());
    return is;
  }

  std::string text(const std::string& rel, const char* producer) const { return read_file(need(rel, producer)); }

  json json_of(const std::string& rel, const char* producer) const {
    return parse_json(text(rel, producer), rel);
  }

  /// Opens an output of the running stage.
  std::ofstream out(const std::string& rel) {
    const auto p = dir / rel;
    fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    if (std::find(outputs.begin(), outputs.end(), rel) == outputs.end()) outputs.push_back(rel);
    return os;
  }

  void out_json(const std::string& rel, const ordered_json& j) { out(rel) << j.dump(2) << '\n'; }

  // ---- artifacts

  const corpus::Vocabulary& vocab() {
    if (!vocab_) vocab_ = corpus::build_vocabulary();
    return *vocab_;
  }
  const corpus::Corpus& corp() {
    if (!corpus_) {
      auto is = in("corpus/corpus.jsonl", kSynth);
      corpus_ = corpus::read_corpus(is);
    }
    return *corpus_;
  }
  const std::vector<std::string>& queries() {
    if (!queries_) {
      auto is = in("corpus/queries.txt", kSynth);
      queries_ = read_lines(is);
    }
    return *queries_;
  }
  const std::vector<std::string>& promos() {
    if (!promos_) {
      auto is = in("corpus/promos.txt", kSynth);
      promos_ = read_lines(is);
    }
    return *promos_;
  }
  const embed::WordVectorTable& table() {
    if (!table_) {
      auto is = in("corpus/word_vectors.txt", kSynth);
      table_ = std::make_shared<embed::WordVectorTable>(embed::WordVectorTable::read(is));
    }
    return *table_;
  }
  std::shared_ptr<embed::MeanPoolEncoder> encoder() {
    if (!encoder_) {
      table();
      encoder_ = std::make_shared<embed::MeanPoolEncoder>(*table_);
    }
    return encoder_;
  }
  std::shared_ptr<target::SearchIndex> index() {
    if (!index_) {
      auto is = in("models/index.txt", kIndex);
      index_ = std::make_shared<target::SearchIndex>(target::SearchIndex::read(is));
    }
    return index_;
  }
  std::shared_ptr<target::VandalismDetector> target_detector() {
    if (!detector_) {
      auto is = in("models/target_detector.txt", kTarget);
      detector_ = std::make_shared<target::VandalismDetector>(target::VandalismDetector::read(is));
    }
    return detector_;
  }
  const target::LocalWiki& wiki() {
    if (!wiki_) wiki_ = std::make_unique<target::LocalWiki>(index(), target_detector(), encoder());
    return *wiki_;
  }
  const std::pair<std::vector<std::string>, std::vector<std::string>>& split() {
    if (!split_) {
      const auto j = json_of("data/query_split.json", kRanker);
      split_.emplace(j.at("train").get<std::vector<std::string>>(), j.at("test").get<std::vector<std::string>>());
    }
    return *split_;
  }
  const adversary::SubstituteRanker& ranker() {
    if (!ranker_) {
      auto is = in("models/ranker.txt", kRanker);
      ranker_ = std::make_unique<adversary::SubstituteRanker>(adversary::SubstituteRanker::load(is));
    }
    return *ranker_;
  }
  adversary::SubstituteDetector substitute_detector(const std::string& rel, const char* producer) {
    auto is = in(rel, producer);
    return adversary::SubstituteDetector::load(is);
  }
  const injection::Tagger& tagger() {
    if (!tagger_) {
      auto is = in("models/tagger.txt", kTagger);
      tagger_ = std::make_unique<injection::Tagger>(injection::Tagger::load(is, table()));
    }
    return *tagger_;
  }
  retrieval::RetrievalNetwork network() {
    auto is = in("models/retrieval.txt", kRetrieval);
    return retrieval::RetrievalNetwork::load(is);
  }
  adversary::Thresholds thresholds() {
    const auto j = json_of("data/thresholds.json", kAttack);
    return {j.at("topic").get<double>(), j.at("consistency").get<double>()};
  }
  std::vector<adversary::Revision> revisions(const std::string& rel) {
    auto is = in(rel, kAttack);
    return adversary::read_revisions(is);
  }

  // ---- manifest

  ordered_json manifest() const {
    const auto path = dir / "manifest.json";
    if (!fs::exists(path)) {
      ordered_json m;
      m["format_version"] = kRunFormatVersion;
      m["config"] = ordered_json::parse(config_json(cfg));
      m["stages"] = ordered_json::object();
      return m;
    }
    return ordered_json::parse(read_file(path));
  }

  void record_stage() {
    auto m = manifest();
    ordered_json entry;
    entry["seeds"] = seeds;
    ordered_json files = ordered_json::array();
    for (const auto& rel : outputs) {
      const auto data = read_file(dir / rel);
      files.push_back({{"path", rel}, {"bytes", data.size()}, {"fnv1a", hex64(fnv1a(data))}});
    }
    entry["outputs"] = files;
    ordered_json stages = ordered_json::object();
    for (const auto& name : stage_names()) {
      if (name == stage) {
        stages[name] = entry;
      } else if (m["stages"].contains(name)) {
        stages[name] = m["stages"][name];
      }
    }
    m["stages"] = stages;
    std::ofstream os(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    os << m.dump(2) << '\n';
  }

  // ---- stages

  void synth_corpus() {
    const auto& c = cfg.corpus;
    corpus::Corpus corp;
    if (c.path.empty()) {
      corp = corpus::synth_corpus(seed(c.seed, "corpus"), c.articles, vocab());
    } else {
      corp = corpus::load_corpus(c.path);
    }
    std::vector<std::string> qs;
    if (c.queries_path.empty()) {
      qs = corpus::synth_queries(vocab(), c.queries, seed(c.query_seed, "queries"));
    } else {
      std::ifstream is(c.queries_path);
      if (!is) throw MissingArtifactError("query list not found: " + c.queries_path);
      qs = read_lines(is);
    }
    require(qs.size() >= 2, "synth-corpus: need at least two queries");
    const auto ps = c.promos.empty() ? vocab().businesses : c.promos;
    embed::WordVectorTable table(50);
    if (c.word_vectors.empty()) {
      for (const auto& [tok, v] : corpus::synth_word_vectors(vocab())) {
        table.add(tok, Eigen::Map<const embed::Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
      }
    } else {
      table = embed::WordVectorTable::load(c.word_vectors);
    }
    { auto os = out("corpus/corpus.jsonl"); corpus::write_corpus(corp, os); }
    { auto os = out("corpus/queries.txt"); write_lines(qs, os); }
    { auto os = out("corpus/promos.txt"); write_lines(ps, os); }
    { auto os = out("corpus/word_vectors.txt"); table.write(os); }
    out_json("reports/corpus.json", {{"articles", corp.size()},
                                     {"pool_articles", corp.pool_articles().size()},
                                     {"raw_paragraphs", corp.raw_paragraphs().size()},
                                     {"queries", qs.size()},
                                     {"promos", ps.size()},
                                     {"corpus_id", corpus_fingerprint(corp)}});
    note(std::to_string(corp.size()) + " articles, " + std::to_string(qs.size()) + " queries");
  }

  void build_index() {
    const auto idx = target::SearchIndex::build(corp());
    auto os = out("models/index.txt");
    idx.write(os);
    note(std::to_string(idx.size()) + " documents");
  }

  void train_target_detector() {
    const auto& t = cfg.target;
    const auto edits = corpus::synth_edits(corp(), t.edits, seed(t.edit_seed, "target-edits"));
    const auto rows = target::edit_dataset(edits, *encoder());
    { auto os = out("data/target_rows.tsv"); write_rows(rows, os); }
    auto tr = target::train_target_detector(rows, t.gbdt, seed(t.edit_seed, "target-split"), t.holdout);
    { auto os = out("models/target_detector.txt"); tr.detector.write(os); }
    out_json("reports/target_detector.json", {{"rows", rows.size()}, {"held_out", scores_json(tr.held_out)}});
    note("held-out accuracy " + fixed(tr.held_out.accuracy, 4));
  }

  void distill_ranker() {
    const auto& r = cfg.ranker;
    const auto [train_q, test_q] = adversary::split_queries(queries(), cfg.split.train_share,
                                                            seed(cfg.split.seed, "query-split"));
    require(!train_q.empty() && !test_q.empty(), "distill-ranker: both query splits must be non-empty");
    out_json("data/query_split.json", {{"train", train_q}, {"test", test_q}});
    split_.emplace(train_q, test_q);

    const auto data =
        adversary::collect_scores(wiki(), train_q, r.model.per_query, r.depth, seed(r.model.seed, "ranker-scores"));
    {
      auto os = out("data/ranker_scores.tsv");
      os << "query\tarticle\tscore\n";
      for (const auto& d : data) os << d.query << '\t' << d.article_id << '\t' << format_double(d.score) << '\n';
    }
    auto mc = r.model;
    mc.seed = seed(r.model.seed, "ranker");
    auto model = adversary::distill_ranker(data, corp(), table(), mc);
    { auto os = out("models/ranker.txt"); model.save(os); }
    const auto ev = adversary::evaluate_ranker(model, wiki(), test_q, corp(), table(), r.depth);
    out_json("reports/ranker.json", {{"training_pairs", data.size()},
                                     {"held_out_queries", ev.queries},
                                     {"held_out_pairs", ev.pairs},
                                     {"ndcg20", ev.ndcg20},
                                     {"ndcg200", ev.ndcg200},
                                     {"mse", ev.mse}});
    note("held-out NDCG@20 " + fixed(ev.ndcg20, 4));
  }

  void train_substitute_detector() {
    const auto& d = cfg.detector;
    const auto data = adversary::label_edits(corpus::synth_edits(corp(), d.edits, seed(d.edit_seed, "subdet-edits")),
                                             wiki(), table());
    auto mc = d.model;
    mc.seed = seed(d.model.seed, "subdet");
    const auto model = adversary::train_substitute_detector(data, mc);
    { auto os = out("models/substitute_detector.txt"); model.save(os); }
    const std::size_t n_eval = std::max<std::size_t>(100, d.edits / 4);
    const auto eval_data = adversary::label_edits(
        corpus::synth_edits(corp(), n_eval, seed(d.edit_seed, "subdet-eval")), wiki(), table());
    const auto s = adversary::evaluate_detector(model, eval_data);
    out_json("reports/substitute_detector.json",
             {{"training_edits", data.size()}, {"agreement_with_target", scores_json(s)}});
    note("agreement " + fixed(s.accuracy, 4));
  }

  void train_tagger() {
    const auto& t = cfg.tagger;
    const std::size_t n_eval = std::max<std::size_t>(50, t.examples / 4);
    auto data = injection::heuristic_dataset(corp().raw_paragraphs(), promos(), queries(), t.examples + n_eval,
                                             seed(t.seed, "tagger-data"));
    std::vector<injection::LabeledParagraph> eval_set(data.begin() + static_cast<std::ptrdiff_t>(t.examples), data.end());
    data.erase(data.begin() + static_cast<std::ptrdiff_t>(t.examples), data.end());
    auto mc = t.model;
    mc.seed = seed(t.model.seed, "tagger");
    const auto model = injection::train_tagger(data, table(), mc);
    { auto os = out("models/tagger.txt"); model.save(os); }
    const auto s = injection::evaluate_tagger(model, eval_set);
    out_json("reports/tagger.json", {{"training_examples", data.size()},
                                     {"held_out_examples", eval_set.size()},
                                     {"precision", s.precision},
                                     {"recall", s.recall},
                                     {"f1", s.f1}});
    note("held-out F1 " + fixed(s.f1, 4));
  }

  void train_retrieval() {
    const auto& a = cfg.attack;
    const auto& rt = cfg.retrieval;
    std::vector<adversary::BucketCoverage> coverage;
    const auto instances = adversary::sample_instances(wiki(), split().first, promos(), a.per_bucket, a.depth,
                                                       seed(a.instance_seed, "instances-train"), &coverage);
    { auto os = out("data/instances_train.jsonl"); write_instances(instances, os); }
    const adversary::AttackContext ctx(corp(), *encoder(), tagger());
    std::vector<adversary::TrainingExample> examples;
    std::vector<retrieval::CandidatePool> pools;
    std::size_t infeasible = 0;
    for (const auto& inst : instances) {
      try {
        examples.push_back(adversary::make_example(ctx, inst, rt.training.pool_cap));
      } catch (const InfeasibleError&) {
        ++infeasible;
      }
    }
    require(!examples.empty(), "train-retrieval: no feasible training instance");
    auto mc = rt.model;
    mc.seed = seed(rt.model.seed, "retrieval");
    retrieval::RetrievalNetwork net(mc);
    auto detector = substitute_detector("models/substitute_detector.txt", kSubDet);
    const auto before = adversary::mean_losses(net, ranker(), detector, examples);
    auto tc = rt.training;
    tc.seed = seed(rt.training.seed, "retrieval-training");
    const auto log = adversary::train_retrieval(net, ranker(), detector, examples, tc, &wiki(), &corp());
    const auto after = adversary::mean_losses(net, ranker(), detector, examples);
    { auto os = out("models/retrieval.txt"); net.save(os); }
    { auto os = out("models/substitute_detector_attack.txt"); detector.save(os); }
    { auto os = out("logs/retrieval_training.tsv"); adversary::write_training_log(log, os); }
    ordered_json w = ordered_json::array();
    if (!log.records.empty()) {
      for (double x : log.records.back().weight) w.push_back(x);
    }
    const char* names[] = {"rank", "detect", "topic", "semantic"};
    ordered_json lb, la;
    for (int t = 0; t < adversary::kTaskCount; ++t) {
      lb[names[t]] = before[static_cast<std::size_t>(t)];
      la[names[t]] = after[static_cast<std::size_t>(t)];
    }
    out_json("reports/retrieval.json", {{"instances", instances.size()},
                                        {"examples", examples.size()},
                                        {"infeasible", infeasible},
                                        {"steps", log.records.size()},
                                        {"diverged", log.diverged},
                                        {"final_weights", w},
                                        {"mean_loss_before", lb},
                                        {"mean_loss_after", la}});
    note(std::to_string(examples.size()) + " examples, " + std::to_string(log.records.size()) + " steps");
  }

  void attack() {
    const auto& a = cfg.attack;
    ThresholdEstimate est;
    const auto& th = cfg.thresholds;
    bool overridden = th.topic.has_value() || th.consistency.has_value();
    if (!th.topic || !th.consistency) {
      est = compute_thresholds(corp(), *encoder(), std::min(th.sample, corp().size()), seed(th.seed, "thresholds"));
    } else {
      est.corpus_id = corpus_fingerprint(corp());
    }
    if (th.topic) est.topic = *th.topic;
    if (th.consistency) est.consistency = *th.consistency;
    out_json("data/thresholds.json", {{"topic", est.topic},
                                      {"consistency", est.consistency},
                                      {"sample", est.sample},
                                      {"corpus_id", est.corpus_id},
                                      {"overridden", overridden}});
    const auto thresholds = est.thresholds();

    std::vector<adversary::BucketCoverage> coverage;
    const auto instances = adversary::sample_instances(wiki(), split().second, promos(), a.per_bucket, a.depth,
                                                       seed(a.instance_seed, "instances-test"), &coverage);
    { auto os = out("data/instances_test.jsonl"); write_instances(instances, os); }
    {
      auto os = out("data/coverage_test.tsv");
      os << "query\tbucket\tavailable\ttaken\n";
      for (const auto& c : coverage) os << c.query << '\t' << c.bucket << '\t' << c.available << '\t' << c.taken << '\n';
    }

    const adversary::AttackContext ctx(corp(), *encoder(), tagger());
    const auto net = network();
    const auto detector = substitute_detector("models/substitute_detector_attack.txt", kRetrieval);
    const double density = a.keyword_density;
    const std::uint64_t stuff_seed = seed(a.seed, "keyword-stuffing");
    adversary::Baseline keyword{
        "keyword", [&](const adversary::Instance& inst, const std::vector<adversary::Candidate>& cands, std::size_t draw) {
          const auto& c = cands[draw % cands.size()];
          std::size_t tokens = c.paragraph.tokens().size();
          for (const auto& p : ctx.corpus().at(inst.article_id).paragraphs) tokens += p.tokens().size();
          auto st = keyword_stuff(c.paragraph, inst.query, density, tokens,
                                  fnv1a(inst.query + '\n' + inst.article_id, stuff_seed));
          auto view = ctx.view(st.paragraph.tokens());
          return adversary::Candidate{c.pool_index, std::move(st.paragraph), std::move(view)};
        }};
    const auto run = adversary::run_attacks(ctx, wiki(), net, detector, instances, thresholds, a.pool_cap,
                                            seed(a.seed, "attack"), {keyword}, true);
    { auto os = out("data/pools_test.jsonl"); retrieval::write_pools(run.pools, os); }
    { auto os = out("attacks/revisions_mawseo.jsonl"); adversary::write_revisions(run.mawseo, os); }
    { auto os = out("attacks/revisions_random.jsonl"); adversary::write_revisions(run.random, os); }
    { auto os = out("attacks/revisions_keyword.jsonl"); adversary::write_revisions(run.baselines.at("keyword"), os); }
    note("test split: " + std::to_string(run.mawseo.size()) + " revisions, " + std::to_string(run.infeasible) +
         " infeasible");

    // Attack revisions on the training queries feed adversarial retraining.
    auto is = in("data/instances_train.jsonl", kRetrieval);
    const auto train_instances = read_instances(is);
    std::vector<adversary::Revision> train_revisions;
    std::size_t train_infeasible = 0;
    for (const auto& inst : train_instances) {
      try {
        train_revisions.push_back(adversary::attack(ctx, wiki(), net, detector, inst, thresholds, a.pool_cap));
      } catch (const InfeasibleError&) {
        ++train_infeasible;
      }
    }
    { auto os = out("attacks/revisions_train_mawseo.jsonl"); adversary::write_revisions(train_revisions, os); }
    out_json("reports/attack.json", {{"test_instances", instances.size()},
                                     {"test_infeasible", run.infeasible},
                                     {"mawseo", run.mawseo.size()},
                                     {"random", run.random.size()},
                                     {"keyword", run.baselines.at("keyword").size()},
                                     {"keyword_infeasible", run.baseline_infeasible.at("keyword")},
                                     {"train_instances", train_instances.size()},
                                     {"train_revisions", train_revisions.size()},
                                     {"train_infeasible", train_infeasible}});
    note("training split: " + std::to_string(train_revisions.size()) + " revisions");
  }

  void defend_coherence() {
    const auto& c = cfg.coherence;
    const auto triplets = defense::build_triplets(corp(), c.triplets, seed(c.triplet_seed, "triplets"));
    { auto os = out("data/triplets.jsonl"); defense::write_triplets(triplets, os); }
    auto mc = c.model;
    mc.seed = seed(c.model.seed, "coherence");
    const auto tr = defense::train_coherence(triplets, *encoder(), mc);
    { auto os = out("models/coherence.txt"); tr.model.save(os); }

    const auto revs = revisions("attacks/revisions_mawseo.jsonl");
    require(!revs.empty(), "defend-coherence: no attack revisions");
    const auto pairs = defense::revision_edits(revs, corp());
    const auto legit = defense::legitimate_revisions(corp(), pairs.size(), seed(c.legitimate_seed, "coherence-legit"));
    std::vector<bool> rev_flags, legit_flags;
    auto os = out("reports/coherence_flags.tsv");
    os << "sample\tquery\tarticle\tinsertion_index\tflagged\tupper_positive\tupper_negative\tlower_positive\t"
          "lower_negative\n";
    auto row = [&](const char* kind, const std::string& query, const std::string& id, std::size_t at,
                   const defense::JointVerdict& v) {
      os << kind << '\t' << query << '\t' << id << '\t' << at << '\t' << (v.flagged ? 1 : 0) << '\t'
         << format_double(v.upper.positive) << '\t' << format_double(v.upper.negative) << '\t'
         << format_double(v.lower.positive) << '\t' << format_double(v.lower.negative) << '\n';
    };
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto v = defense::detect_revision(tr.model, pairs[i].first, pairs[i].second, *encoder(), c.margin);
      rev_flags.push_back(v.flagged);
      row("mawseo", revs[i].query, revs[i].article_id, revs[i].insertion_index, v);
    }
    for (const auto& [before, after] : legit) {
      const auto v = defense::detect_revision(tr.model, before, after, *encoder(), c.margin);
      legit_flags.push_back(v.flagged);
      row("legitimate", "", after.id, corpus::inserted_index(before, after) - 1, v);
    }
    os.close();
    const auto rates = defense::detection_rates(rev_flags, legit_flags);
    ordered_json losses = tr.epoch_loss;
    out_json("reports/defense_coherence.json", {{"triplets", triplets.size()},
                                                {"held_out_triplets", tr.held_out},
                                                {"train_accuracy", tr.train_accuracy},
                                                {"held_out_accuracy", tr.held_out_accuracy},
                                                {"epoch_loss", losses},
                                                {"margin", c.margin},
                                                {"detection", rates_json(rates)}});
    note("held-out accuracy " + fixed(tr.held_out_accuracy, 4) + ", recall " + fixed(rates.recall, 4) +
         ", legitimate accuracy " + fixed(rates.legitimate_accuracy, 4));
  }

  void defend_adv_train() {
    auto is = in("data/target_rows.tsv", kTarget);
    const auto rows = read_rows(is);
    const auto train_pairs = defense::revision_edits(revisions("attacks/revisions_train_mawseo.jsonl"), corp());
    const auto retrained =
        defense::adversarial_retrain(rows, train_pairs, *encoder(), cfg.target.gbdt, target_detector()->threshold());
    { auto os = out("models/target_detector_retrained.txt"); retrained.write(os); }

    const auto test_pairs = defense::revision_edits(revisions("attacks/revisions_mawseo.jsonl"), corp());
    require(!test_pairs.empty(), "defend-adv-train: no held-out attack revisions");
    std::vector<defense::ArticlePair> legit;
    for (auto& e : corpus::synth_edits(corp(), test_pairs.size(), seed(cfg.adv_train.legitimate_seed, "adv-legit"), 0.0)) {
      legit.emplace_back(std::move(e.before), std::move(e.after));
    }
    const auto before = defense::evaluate_vandalism_detector(*target_detector(), test_pairs, legit, *encoder());
    const auto after = defense::evaluate_vandalism_detector(retrained, test_pairs, legit, *encoder());
    out_json("reports/defense_adv_train.json", {{"training_rows", rows.size()},
                                                {"training_revisions", train_pairs.size()},
                                                {"original", rates_json(before)},
                                                {"retrained", rates_json(after)}});
    note("recall " + fixed(before.recall, 4) + " -> " + fixed(after.recall, 4) + ", legitimate accuracy " +
         fixed(after.legitimate_accuracy, 4));
  }

  void evaluate() {
    const auto th = thresholds();
    const std::vector<std::pair<std::string, std::string>> methods = {
        {"mawseo", "attacks/revisions_mawseo.jsonl"},
        {"random", "attacks/revisions_random.jsonl"},
        {"keyword", "attacks/revisions_keyword.jsonl"}};
    ordered_json report;
    report["thresholds"] = {{"topic", th.topic}, {"consistency", th.consistency}};
    auto table = out("reports/attack_table.tsv");
    table << "method\tcount\trank_boosting\tevasion\ttopic_relevancy\tsemantic_consistency\tpromotion_success\n";
    auto levels = out("reports/rank_levels.tsv");
    levels << "method\tfirst_rank\tlast_rank\tcount\tboosted\tboosting_rate\tmean_margin\n";
    std::vector<adversary::Revision> mawseo;
    for (const auto& [method, rel] : methods) {
      const auto revs = revisions(rel);
      if (revs.empty()) {
        report["methods"][method] = {{"count", 0}};
        continue;
      }
      const auto m = compute_metrics(revs, th);
      report["methods"][method] = rates_json(m);
      table << method << '\t' << m.count << '\t' << format_double(m.rank_boosting_rate) << '\t'
            << format_double(m.evasion_rate) << '\t' << format_double(m.topic_relevancy_rate) << '\t'
            << format_double(m.semantic_consistency_rate) << '\t' << format_double(m.promotion_success_rate) << '\n';
      for (const auto& l : rank_level_report(revs)) {
        levels << method << '\t' << l.first_rank << '\t' << l.last_rank << '\t' << l.count << '\t' << l.boosted
               << '\t' << format_double(l.boosting_rate) << '\t' << format_double(l.mean_margin) << '\n';
      }
      if (method == "mawseo") mawseo = revs;
    }
    table.close();
    levels.close();
    out_json("reports/metrics.json", report);

    const auto& rv = cfg.revenue;
    const fs::path view_path = rv.view_table.empty() ? fs::path(WIKISEO_DATA_DIR) / "views_by_rank.csv"
                                                     : fs::path(rv.view_table);
    const auto views = ViewTable::load(view_path);
    std::vector<adversary::Revision> succeeded;
    for (auto r : mawseo) {
      adversary::set_objectives(r, th);
      if (r.success()) succeeded.push_back(r);
    }
    const auto all = revision_views(mawseo, views);
    const auto won = revision_views(succeeded, views);
    const auto est = estimate_revenue(won.after, rv.view_through_rate, rv.revenue_per_action);
    out_json("reports/revenue.json", {{"revisions", mawseo.size()},
                                      {"successful_revisions", succeeded.size()},
                                      {"views_before_all", all.before},
                                      {"views_after_all", all.after},
                                      {"views_before_successful", won.before},
                                      {"total_views", est.total_views},
                                      {"view_through_rate", est.view_through_rate},
                                      {"revenue_per_action", est.revenue_per_action},
                                      {"revenue", est.revenue}});
    note("MAWSEO promotion success " + percent(report["methods"]["mawseo"].value("promotion_success_rate", 0.0)));
  }

  void report() {
    const auto metrics = json_of("reports/metrics.json", kEval);
    const auto revenue = json_of("reports/revenue.json", kEval);
    const auto coherence = json_of("reports/defense_coherence.json", kCoherence);
    const auto adv = json_of("reports/defense_adv_train.json", kAdvTrain);
    const auto ranker_r = json_of("reports/ranker.json", kRanker);
    const auto levels_tsv = text("reports/rank_levels.tsv", kEval);

    std::ostringstream s;
    auto cell = [&s](const std::string& v, int w) { s << std::left << std::setw(w) << v; };
    s << "Attack results (thresholds: topic " << fixed(metrics["thresholds"]["topic"].get<double>(), 4)
      << ", consistency " << fixed(metrics["thresholds"]["consistency"].get<double>(), 4) << ")\n";
    cell("Method", 10), cell("N", 6), cell("Rank boosting", 15), cell("Evasion", 10), cell("Topic", 10),
        cell("Consistency", 13), s << "Promotion success\n";
    for (const char* name : {"mawseo", "random", "keyword"}) {
      if (!metrics["methods"].contains(name)) continue;
      const auto& m = metrics["methods"][name];
      cell(name, 10), cell(std::to_string(m.at("count").get<std::size_t>()), 6);
      if (m.at("count").get<std::size_t>() == 0) {
        s << "-\n";
        continue;
      }
      cell(percent(m["rank_boosting_rate"]), 15), cell(percent(m["evasion_rate"]), 10),
          cell(percent(m["topic_relevancy_rate"]), 10), cell(percent(m["semantic_consistency_rate"]), 13);
      s << percent(m["promotion_success_rate"]) << '\n';
    }

    s << "\nRank levels (MAWSEO)\n";
    cell("Ranks", 12), cell("N", 6), cell("Boosting rate", 15), s << "Mean margin\n";
    std::istringstream ls(levels_tsv);
    std::string line;
    std::getline(ls, line);
    while (std::getline(ls, line)) {
      std::vector<std::string> f;
      std::istringstream fs_(line);
      for (std::string c; std::getline(fs_, c, '\t');) f.push_back(c);
      if (f.size() != 7 || f[0] != "mawseo") continue;
      cell(f[1] + "-" + f[2], 12), cell(f[3], 6), cell(percent(parse_double(f[5])), 15);
      s << fixed(parse_double(f[6]), 2) << '\n';
    }

    s << "\nDefenses\n";
    cell("Method", 34), cell("Detection", 12), s << "Legitimate accuracy\n";
    const auto& cd = coherence["detection"];
    cell("Coherence-based", 34), cell(percent(cd["recall"]), 12), s << percent(cd["legitimate_accuracy"]) << '\n';
    cell("Target detector", 34), cell(percent(adv["original"]["recall"]), 12),
        s << percent(adv["original"]["legitimate_accuracy"]) << '\n';
    cell("Adversarial training", 34), cell(percent(adv["retrained"]["recall"]), 12),
        s << percent(adv["retrained"]["legitimate_accuracy"]) << '\n';
    s << "Coherence held-out pairwise accuracy: " << percent(coherence["held_out_accuracy"]) << '\n';

    s << "\nSubstitute ranker held-out NDCG@20: " << fixed(ranker_r["ndcg20"].get<double>(), 4) << '\n';
    s << "Revenue: " << fixed(revenue["total_views"].get<double>(), 1) << " views x "
      << revenue["view_through_rate"].get<double>() << " x " << fixed(revenue["revenue_per_action"].get<double>(), 2)
      << " = " << fixed(revenue["revenue"].get<double>(), 2) << '\n';
    out("reports/summary.txt") << s.str();
    if (log) *log << s.str();
  }

  using StageFn = void (State::*)();
  StageFn find(const std::string& name) const {
    static const std::map<std::string, StageFn> fns = {
        {kSynth, &State::synth_corpus},       {kIndex, &State::build_index},
        {kTarget, &State::train_target_detector}, {kRanker, &State::distill_ranker},
        {kSubDet, &State::train_substitute_detector}, {kTagger, &State::train_tagger},
        {kRetrieval, &State::train_retrieval}, {kAttack, &State::attack},
        {kCoherence, &State::defend_coherence}, {kAdvTrain, &State::defend_adv_train},
        {kEval, &State::evaluate},            {kReport, &State::report}};
    auto it = fns.find(name);
    if (it == fns.end()) throw LookupError("unknown stage '" + name + "'");
    return it->second;
  }
};

Pipeline::Pipeline(ExperimentConfig config, fs::path run_dir, std::ostream* log) : s_(std::make_unique<State>()) {
  s_->cfg = std::move(config);
  s_->dir = std::move(run_dir);
  s_->log = log;
  if (const auto existing = manifest_config(s_->dir)) {
    if (config_json(*existing) != config_json(s_->cfg)) {
      throw ContractError("run directory " + s_->dir.string() + " was started with a different config");
    }
  }
}

Pipeline::~Pipeline() = default;

void Pipeline::run(const std::string& stage) {
  const auto fn = s_->find(stage);
  fs::create_directories(s_->dir);
  s_->stage = stage;
  s_->outputs.clear();
  s_->seeds = ordered_json::object();
  const auto t0 = std::chrono::steady_clock::now();
  (s_.get()->*fn)();
  s_->record_stage();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  s_->note("done in " + fixed(secs, 1) + " s");
}

void Pipeline::run_all() {
  for (const auto& name : stage_names()) run(name);
}

const ExperimentConfig& Pipeline::config() const { return s_->cfg; }
const fs::path& Pipeline::run_dir() const { return s_->dir; }

}  // namespace wikiseo::eval
