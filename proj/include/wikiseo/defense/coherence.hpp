#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "wikiseo/corpus/article.hpp"
#include "wikiseo/embed/sentence.hpp"
#include "wikiseo/nn/layers.hpp"

namespace wikiseo::defense {

using nn::Mat;
using embed::Vec;

enum class ChunkOrigin { kFirst, kLast };

/// The first or last two sentences of a paragraph (one if it has only one).
struct SentenceChunk {
  std::vector<std::string> sentences;
  ChunkOrigin origin = ChunkOrigin::kFirst;

  std::string text() const;
  friend bool operator==(const SentenceChunk&, const SentenceChunk&) = default;
};

SentenceChunk extract_chunk(const corpus::Paragraph& p, ChunkOrigin which);

enum class Role { kSubject = 0, kObject = 1, kOther = 2, kAbsent = 3 };

/// Entities of a (former, latter) chunk pair with their role in each chunk.
struct EntityGrid {
  std::vector<std::string> entities;
  std::vector<std::array<Role, 2>> roles;
  /// Counts of (role in former, role in latter), indexed 4 * former + latter.
  std::array<int, 16> transitions{};
};

/// Entities are capitalised tokens not opening a sentence plus content
/// words (not stopwords or verbs, at least three letters). Within a
/// sentence, an entity before the first verb is a subject, after it an
/// object, and "other" if the sentence has no verb. A chunk takes the
/// strongest role over its sentences.
EntityGrid entity_grid(const SentenceChunk& former, const SentenceChunk& latter);

/// A training or test triplet. When `anchor_first` the scored pairs are
/// (anchor, positive) and (anchor, negative); otherwise the anchor follows:
/// (positive, anchor) and (negative, anchor).
struct CoherenceTriplet {
  SentenceChunk anchor;
  SentenceChunk positive;
  SentenceChunk negative;
  bool anchor_first = true;
  // provenance
  std::string article_id;
  std::size_t paragraph = 0;  // upper paragraph of the joint
  std::string negative_source;
  std::size_t negative_paragraph = 0;

  friend bool operator==(const CoherenceTriplet&, const CoherenceTriplet&) = default;
};

/// Joints of consecutive paragraphs (both orientations) with negatives
/// taken from other indexed articles. Requires articles with >= 2 paragraphs.
std::vector<CoherenceTriplet> build_triplets(const corpus::Corpus& corpus, std::size_t n, std::uint64_t seed);

/// The two joints around the paragraph inserted into `before`: upper
/// (anchor = last chunk above, positive = the displaced paragraph's first
/// chunk, negative = the inserted first chunk) and lower (anchor = the
/// displaced paragraph's first chunk, positive = last chunk above, negative
/// = the inserted last chunk). ContractError unless `after` is `before`
/// plus one paragraph with a paragraph below it.
std::array<CoherenceTriplet, 2> triplets_from_revision(const corpus::Article& before, const corpus::Article& after);

void write_triplets(const std::vector<CoherenceTriplet>& triplets, std::ostream& os);
std::vector<CoherenceTriplet> read_triplets(std::istream& is);

/// Precomputed model input for one ordered chunk pair.
struct PairFeatures {
  Vec grid;    // 16, log1p of transition counts
  Vec former;  // sentence vectors
  Vec latter;
};

PairFeatures pair_features(const SentenceChunk& former, const SentenceChunk& latter,
                           const embed::SentenceEncoder& encoder);

struct CoherenceConfig {
  int dimension = 50;
  int grid_hidden = 8;
  int pair_hidden = 16;
  int head_hidden = 16;
  double learning_rate = 0.005;
  int epochs = 4;
  double holdout = 0.1;
  std::uint64_t seed = 41;
};

/// Entity-grid encoder and a semantic pair encoder over
/// [u, v, u*v, |u-v|], fused by a feed-forward head into one score.
class CoherenceModel {
 public:
  explicit CoherenceModel(const CoherenceConfig& config);

  nn::Var score(nn::Tape& tape, const PairFeatures& f) const;
  double score(const PairFeatures& f) const;

  nn::ParameterStore& store() { return store_; }
  const CoherenceConfig& config() const { return config_; }

  void save(std::ostream& os) const;
  static CoherenceModel load(std::istream& is);

 private:
  CoherenceConfig config_;
  nn::ParameterStore store_;
  nn::Linear grid_;
  nn::Linear pair_;
  nn::Mlp head_;
};

double coherence_score(const CoherenceModel& model, const SentenceChunk& former, const SentenceChunk& latter,
                       const embed::SentenceEncoder& encoder);

/// max(0, 1 - f_pos + f_neg)
double hinge_loss(double f_pos, double f_neg);
nn::Var hinge_loss(nn::Var f_pos, nn::Var f_neg);

struct TripletScores {
  double positive = 0.0;
  double negative = 0.0;
};

TripletScores score_triplet(const CoherenceModel& model, const CoherenceTriplet& t,
                            const embed::SentenceEncoder& encoder);

/// Share of triplets with f(positive pair) > f(negative pair).
double pairwise_accuracy(const CoherenceModel& model, const std::vector<CoherenceTriplet>& triplets,
                         const embed::SentenceEncoder& encoder);

struct CoherenceTraining {
  CoherenceModel model;
  double train_accuracy = 0.0;
  double held_out_accuracy = 0.0;
  std::size_t held_out = 0;
  std::vector<double> epoch_loss;
};

/// Pairwise hinge training on a seeded split. Requires >= 500 triplets.
CoherenceTraining train_coherence(const std::vector<CoherenceTriplet>& triplets, const embed::SentenceEncoder& encoder,
                                  const CoherenceConfig& config = {});

struct JointVerdict {
  bool flagged = false;
  TripletScores upper;
  TripletScores lower;
};

/// Flags the revision when, at either joint, the inserted side scores
/// below the original side by more than `margin`.
JointVerdict detect_revision(const CoherenceModel& model, const corpus::Article& before, const corpus::Article& after,
                             const embed::SentenceEncoder& encoder, double margin = 0.0);

/// Unmodified articles seen as the insertion of one of their own middle
/// paragraphs: pairs of (article without paragraph k, article), 1 <= k <= m-2.
std::vector<std::pair<corpus::Article, corpus::Article>> legitimate_revisions(const corpus::Corpus& corpus,
                                                                              std::size_t n, std::uint64_t seed);

}  // namespace wikiseo::defense
