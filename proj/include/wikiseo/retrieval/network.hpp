#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wikiseo/embed/sentence.hpp"
#include "wikiseo/nn/layers.hpp"

namespace wikiseo::retrieval {

using nn::Mat;
using nn::Vec;

/// Raw inputs of one text: its word vectors (one row per token) and sentence vector.
struct TextView {
  Mat words;
  Vec sentence;
};

TextView view_of(const std::vector<std::string>& tokens, const embed::MeanPoolEncoder& encoder);

struct RetrievalConfig {
  int word_dim = 50;
  int hidden = 64;
  int latent = 32;
  int word_latent = 32;
  int pool_k = 3;  // k-max pooling inside word density
  int top_k = 5;   // candidates mixed into the soft representation
  std::uint64_t seed = 3;
};

// Plain-matrix building blocks. These are also the oracles the network is
// checked against.

/// Sum over query rows of (max cosine + mean of top-k cosines) / 2 against
/// the paragraph rows. Throws ContractError on empty inputs or k < 1.
double word_density(const Mat& query_words, const Mat& paragraph_words, int k);

/// softmax(sim_q) + softmax(sim_a); components sum to 2.
Vec selector_probabilities(const Vec& sim_q, const Vec& sim_a);

/// Index of the largest entry, lowest index on ties.
std::size_t argmax(const Vec& v);

/// Indices of the k largest entries, descending, ties by lower index.
std::vector<std::size_t> top_k_indices(const Vec& v, std::size_t k);

struct SoftWeights {
  std::vector<std::size_t> indices;
  Vec weights;  // sums to 1
};

/// Top-k of P with weights P_i / sum over the top-k.
SoftWeights soft_weights(const Vec& probabilities, int k);

/// Weighted mix of candidate representations under soft_weights().
Vec soft_representation(const std::vector<Vec>& representations, const Vec& probabilities, int k);

struct InsertionChoice {
  std::size_t index = 0;  // insert between paragraphs index and index + 1
  Vec probabilities;      // one per adjacent pair
};

/// g_i = (cos(p, r_i) + cos(p, r_{i+1})) / 2, softmaxed; needs >= 2 paragraphs.
InsertionChoice insertion_position(const std::vector<Vec>& paragraphs, const Vec& p);

struct RetrievalOutput {
  Vec sim_q;
  Vec sim_a;
  Vec probabilities;
  std::size_t argmax_index = 0;
};

/// Differentiable forward for training. Weights and the soft representations
/// depend on the parameters; everything else is a constant on the tape.
struct TrainingForward {
  nn::Var probabilities;  // 1 x n
  SoftWeights selected;   // weights are the values of `weights`
  nn::Var weights;        // 1 x k
  nn::Var z_vec;          // 1 x representation_dim()
  nn::Var z_seq;          // L x word_dim, padded word rows of the top-k mixed
};

/// Semantic tower over article/paragraph sentence vectors, TermPool tower
/// (separate semantic projection plus a word encoder) over query/paragraph.
class RetrievalNetwork {
 public:
  explicit RetrievalNetwork(const RetrievalConfig& config);

  const RetrievalConfig& config() const { return config_; }
  nn::ParameterStore& store() { return store_; }
  const nn::ParameterStore& store() const { return store_; }

  double semantic_similarity(const Vec& article, const Vec& paragraph) const;
  double query_semantic_similarity(const Vec& query, const Vec& paragraph) const;
  double word_density_similarity(const Mat& query_words, const Mat& paragraph_words) const;
  /// Sim^q: query semantic similarity times word density.
  double query_similarity(const TextView& query, const TextView& paragraph) const;

  /// Encoded word rows.
  Mat encode_words(const Mat& words) const;

  /// [sentence vector; mean encoded word vector].
  Vec representation(const TextView& text) const;
  int representation_dim() const { return config_.word_dim + config_.word_latent; }

  /// Throws ContractError for an empty candidate list.
  RetrievalOutput select(const TextView& query, const TextView& lead, const std::vector<TextView>& candidates) const;

  TrainingForward forward(nn::Tape& tape, const TextView& query, const TextView& lead,
                          const std::vector<TextView>& candidates) const;

  void save(std::ostream& os) const;
  static RetrievalNetwork load(std::istream& is);

 private:
  nn::Var density(nn::Tape& tape, nn::Var query_enc, const Mat& paragraph_words) const;

  RetrievalConfig config_;
  nn::ParameterStore store_;
  nn::Mlp article_tower_;
  nn::Mlp query_tower_;
  nn::Linear word_encoder_;
};

}  // namespace wikiseo::retrieval
