#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wikiseo/corpus/article.hpp"
#include "wikiseo/embed/word_vectors.hpp"
#include "wikiseo/nn/layers.hpp"
#include "wikiseo/target/wiki_api.hpp"

namespace wikiseo::adversary {

using nn::Mat;
using nn::Vec;

struct RankerConfig {
  int word_dim = 50;
  int hidden = 8;  // per LSTM direction
  int kmax = 5;
  int head_hidden = 16;
  int max_doc_tokens = 256;
  double learning_rate = 0.01;
  int epochs = 6;
  int per_query = 50;
  std::uint64_t seed = 11;
};

/// Pointwise matching model in the MV-LSTM family: a shared BiLSTM over
/// query and document, cosine interactions between positions, k-max pooled
/// into a small regression head.
class SubstituteRanker {
 public:
  explicit SubstituteRanker(const RankerConfig& config);

  /// Document rows beyond max_doc_tokens are dropped.
  nn::Var score(nn::Tape& tape, const Mat& query_words, nn::Var doc_words) const;
  double score(const Mat& query_words, const Mat& doc_words) const;

  /// Affine map from the head output to the target scale.
  void set_target_scale(double mean, double stddev);

  const RankerConfig& config() const { return config_; }
  nn::ParameterStore& store() { return store_; }

  void save(std::ostream& os) const;
  static SubstituteRanker load(std::istream& is);

 private:
  RankerConfig config_;
  nn::ParameterStore store_;
  nn::BiLstm encoder_;
  nn::Mlp head_;
  double mean_ = 0.0;
  double stddev_ = 1.0;
};

/// One training or evaluation target from the search engine.
struct ScoredPair {
  std::string query;
  std::string article_id;
  double score = 0.0;
};

/// Word rows of the article's paragraph tokens, in order.
Mat article_words(const corpus::Article& a, const embed::WordVectorTable& table);
Mat query_words(const std::string& query, const embed::WordVectorTable& table);

/// Up to `per_query` positively scored results per query, sampled from the
/// top `depth`; uses only search().
std::vector<ScoredPair> collect_scores(const target::WikiApi& wiki, const std::vector<std::string>& queries,
                                       std::size_t per_query, std::size_t depth, std::uint64_t seed);

/// Squared-error regression on the scores. Throws TrainingError unless some
/// query has at least two scored results.
SubstituteRanker distill_ranker(const std::vector<ScoredPair>& data, const corpus::Corpus& corpus,
                                const embed::WordVectorTable& table, const RankerConfig& config = {});

/// NDCG@k with log2 discount and the true scores as gains; `predicted`
/// decides the order. Returns 1 when the ideal DCG is 0.
double ndcg_at(const std::vector<double>& truth, const std::vector<double>& predicted, std::size_t k);

double mean_squared_error(const std::vector<double>& truth, const std::vector<double>& predicted);

struct RankerEvaluation {
  double mse = 0.0;
  double ndcg20 = 0.0;
  double ndcg200 = 0.0;
  std::size_t queries = 0;
  std::size_t pairs = 0;
};

/// Scores all positively scored top-`depth` results of each query.
RankerEvaluation evaluate_ranker(const SubstituteRanker& ranker, const target::WikiApi& wiki,
                                 const std::vector<std::string>& queries, const corpus::Corpus& corpus,
                                 const embed::WordVectorTable& table, std::size_t depth = 200);

}  // namespace wikiseo::adversary
