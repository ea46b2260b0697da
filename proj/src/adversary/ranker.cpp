#include "wikiseo/adversary/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include <json.hpp>

#include "wikiseo/common/error.hpp"
#include "wikiseo/common/random.hpp"
#include "wikiseo/corpus/text.hpp"

namespace wikiseo::adversary {

using nn::Tape;
using nn::Var;

namespace {

// k-max of an interaction matrix, zero-padded to k entries.
Var padded_kmax(Tape& tape, Var c, int k) {
  Var top = nn::kmax(c, k);
  if (top.cols() == k) return top;
  return nn::concat_cols({top, tape.constant(Mat::Zero(1, k - top.cols()))});
}

}  // namespace

SubstituteRanker::SubstituteRanker(const RankerConfig& config) : config_(config) {
  require(config.kmax >= 1 && config.max_doc_tokens >= 1, "SubstituteRanker: bad config");
  Rng rng(config.seed);
  encoder_ = nn::BiLstm(store_, "encoder", config.word_dim, config.hidden, rng);
  const Eigen::Index features = 2 * config.kmax + 3;
  head_ = nn::Mlp(store_, "head", {features, config.head_hidden, 1}, rng);
}

void SubstituteRanker::set_target_scale(double mean, double stddev) {
  require(stddev > 0.0, "set_target_scale: stddev must be positive");
  mean_ = mean;
  stddev_ = stddev;
}

Var SubstituteRanker::score(Tape& tape, const Mat& query_words, Var doc_words) const {
  require(query_words.rows() > 0 && doc_words.rows() > 0, "ranker: empty query or document");
  if (doc_words.rows() > config_.max_doc_tokens) doc_words = nn::slice_rows(doc_words, 0, config_.max_doc_tokens);
  Var qw = tape.constant(query_words);
  Var q = nn::concat_cols({encoder_(tape, qw), qw});
  Var d = nn::concat_cols({encoder_(tape, doc_words), doc_words});
  Var c = nn::cosine_matrix(q, d);
  Var exact = nn::cosine_matrix(qw, doc_words);
  const double length = std::log1p(static_cast<double>(doc_words.rows())) / 5.0;
  Var features = nn::concat_cols({padded_kmax(tape, c, config_.kmax), nn::mean(nn::max_rows(c)),
                                  padded_kmax(tape, exact, config_.kmax), nn::mean(nn::max_rows(exact)),
                                  tape.constant(Mat::Constant(1, 1, length))});
  return nn::add_scalar(nn::scale(head_(tape, features), stddev_), mean_);
}

double SubstituteRanker::score(const Mat& query_words, const Mat& doc_words) const {
  Tape tape;
  return score(tape, query_words, tape.constant(doc_words)).scalar();
}

void SubstituteRanker::save(std::ostream& os) const {
  nlohmann::ordered_json cfg = {{"word_dim", config_.word_dim},
                                {"hidden", config_.hidden},
                                {"kmax", config_.kmax},
                                {"head_hidden", config_.head_hidden},
                                {"max_doc_tokens", config_.max_doc_tokens},
                                {"learning_rate", config_.learning_rate},
                                {"epochs", config_.epochs},
                                {"per_query", config_.per_query},
                                {"seed", config_.seed},
                                {"target_mean", mean_},
                                {"target_stddev", stddev_}};
  store_.save(os, "ranker", cfg.dump());
}

SubstituteRanker SubstituteRanker::load(std::istream& is) {
  const auto cfg = nlohmann::json::parse(nn::ParameterStore::read_config(is, "ranker"));
  RankerConfig c;
  c.word_dim = cfg.at("word_dim");
  c.hidden = cfg.at("hidden");
  c.kmax = cfg.at("kmax");
  c.head_hidden = cfg.at("head_hidden");
  c.max_doc_tokens = cfg.at("max_doc_tokens");
  c.learning_rate = cfg.at("learning_rate");
  c.epochs = cfg.at("epochs");
  c.per_query = cfg.at("per_query");
  c.seed = cfg.at("seed");
  SubstituteRanker r(c);
  r.set_target_scale(cfg.at("target_mean"), cfg.at("target_stddev"));
  r.store_.load_tensors(is);
  return r;
}

Mat article_words(const corpus::Article& a, const embed::WordVectorTable& table) {
  std::vector<std::string> toks;
  for (const auto& p : a.paragraphs) toks.insert(toks.end(), p.tokens().begin(), p.tokens().end());
  return table.matrix(toks);
}

Mat query_words(const std::string& query, const embed::WordVectorTable& table) {
  const auto toks = corpus::tokenize(query);
  require(!toks.empty(), "query_words: query has no tokens");
  return table.matrix(toks);
}

std::vector<ScoredPair> collect_scores(const target::WikiApi& wiki, const std::vector<std::string>& queries,
                                       std::size_t per_query, std::size_t depth, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ScoredPair> out;
  for (const auto& q : queries) {
    std::vector<target::RankedResult> hits;
    for (auto& r : wiki.search(q, depth)) {
      if (r.score > 0.0) hits.push_back(std::move(r));
    }
    rng.shuffle(hits);
    if (hits.size() > per_query) hits.resize(per_query);
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
    for (const auto& h : hits) out.push_back({q, h.article_id, h.score});
  }
  return out;
}

SubstituteRanker distill_ranker(const std::vector<ScoredPair>& data, const corpus::Corpus& corpus,
                                const embed::WordVectorTable& table, const RankerConfig& config) {
  std::map<std::string, int> per_query;
  for (const auto& p : data) ++per_query[p.query];
  if (std::none_of(per_query.begin(), per_query.end(), [](const auto& kv) { return kv.second >= 2; })) {
    throw TrainingError("distill_ranker: no query has two scored results");
  }
  double mean = 0.0;
  for (const auto& p : data) mean += p.score;
  mean /= static_cast<double>(data.size());
  double var = 0.0;
  for (const auto& p : data) var += (p.score - mean) * (p.score - mean);
  const double sd = std::max(std::sqrt(var / static_cast<double>(data.size())), 1e-6);

  SubstituteRanker model(config);
  model.set_target_scale(mean, sd);
  std::map<std::string, Mat> docs, queries;
  for (const auto& p : data) {
    if (!docs.count(p.article_id)) docs.emplace(p.article_id, article_words(corpus.at(p.article_id), table));
    if (!queries.count(p.query)) queries.emplace(p.query, query_words(p.query, table));
  }
  nn::Adam opt(config.learning_rate);
  Rng rng(config.seed ^ 0x5C0AEULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (auto i : order) {
      Tape tape;
      Var pred = model.score(tape, queries.at(data[i].query), tape.constant(docs.at(data[i].article_id)));
      // Loss on the standardised scale keeps step sizes independent of score magnitude.
      Var err = nn::scale(nn::add_scalar(pred, -data[i].score), 1.0 / sd);
      Var loss = nn::mul(err, err);
      if (!std::isfinite(loss.scalar())) throw NumericError("distill_ranker: non-finite loss");
      tape.backward(loss);
      opt.step(model.store());
    }
  }
  return model;
}

double ndcg_at(const std::vector<double>& truth, const std::vector<double>& predicted, std::size_t k) {
  require(truth.size() == predicted.size(), "ndcg_at: length mismatch");
  auto dcg = [&](const std::vector<double>& key) {
    std::vector<std::size_t> order(truth.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&key](std::size_t a, std::size_t b) { return key[a] > key[b]; });
    double s = 0.0;
    for (std::size_t r = 0; r < std::min(k, order.size()); ++r) s += truth[order[r]] / std::log2(static_cast<double>(r) + 2.0);
    return s;
  };
  const double ideal = dcg(truth);
  return ideal > 0.0 ? dcg(predicted) / ideal : 1.0;
}

double mean_squared_error(const std::vector<double>& truth, const std::vector<double>& predicted) {
  require(truth.size() == predicted.size() && !truth.empty(), "mean_squared_error: bad lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
  return s / static_cast<double>(truth.size());
}

RankerEvaluation evaluate_ranker(const SubstituteRanker& ranker, const target::WikiApi& wiki,
                                 const std::vector<std::string>& queries, const corpus::Corpus& corpus,
                                 const embed::WordVectorTable& table, std::size_t depth) {
  RankerEvaluation ev;
  std::vector<double> all_truth, all_pred;
  double n20 = 0.0, n200 = 0.0;
  for (const auto& q : queries) {
    const Mat qw = query_words(q, table);
    std::vector<double> truth, pred;
    for (const auto& r : wiki.search(q, depth)) {
      if (r.score <= 0.0) continue;
      truth.push_back(r.score);
      pred.push_back(ranker.score(qw, article_words(corpus.at(r.article_id), table)));
    }
    if (truth.size() < 2) continue;
    n20 += ndcg_at(truth, pred, 20);
    n200 += ndcg_at(truth, pred, 200);
    ++ev.queries;
    all_truth.insert(all_truth.end(), truth.begin(), truth.end());
    all_pred.insert(all_pred.end(), pred.begin(), pred.end());
  }
  require(ev.queries > 0, "evaluate_ranker: no query with two scored results");
  ev.pairs = all_truth.size();
  ev.mse = mean_squared_error(all_truth, all_pred);
  ev.ndcg20 = n20 / static_cast<double>(ev.queries);
  ev.ndcg200 = n200 / static_cast<double>(ev.queries);
  return ev;
}

}  // namespace wikiseo::adversary
