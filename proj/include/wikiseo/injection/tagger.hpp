#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "wikiseo/embed/word_vectors.hpp"
#include "wikiseo/injection/labels.hpp"
#include "wikiseo/nn/layers.hpp"

namespace wikiseo::injection {

struct TaggerConfig {
  int hidden = 16;     // per LSTM direction
  int outer_dim = 32;  // projected promo/query token size
  double learning_rate = 0.01;
  int epochs = 4;
  std::uint64_t seed = 1;
};

using LabeledParagraph = std::pair<InjectionInputs, TagSequence>;

/// BiLSTM over the paragraph with two attention reads per token: a
/// bilinear read over the promotional content and query tokens, and
/// self-attention over the paragraph. Token state and both reads feed a
/// linear-chain CRF over the three revision-entity labels.
class Tagger {
 public:
  Tagger(const embed::WordVectorTable& table, const TaggerConfig& config);

  nn::Var emissions(nn::Tape& tape, const InjectionInputs& in) const;
  nn::Var loss(nn::Tape& tape, const InjectionInputs& in, const TagSequence& gold) const;

  TagSequence tag(const InjectionInputs& in) const;
  /// Per-token label marginals (T x 3), rows sum to 1.
  nn::Mat marginals(const InjectionInputs& in) const;

  nn::ParameterStore& store() { return store_; }
  const TaggerConfig& config() const { return config_; }

  void save(std::ostream& os) const;
  static Tagger load(std::istream& is, const embed::WordVectorTable& table);

 private:
  nn::Mat inputs(const InjectionInputs& in) const;

  const embed::WordVectorTable* table_;
  TaggerConfig config_;
  nn::ParameterStore store_;
  nn::BiLstm encoder_;
  nn::Linear outer_proj_;
  nn::Parameter* bilinear_ = nullptr;
  nn::Linear out_;
  nn::Parameter* transitions_ = nullptr;
  nn::Parameter* start_ = nullptr;
  nn::Parameter* end_ = nullptr;
};

/// Requires >= 50 examples covering all three labels.
Tagger train_tagger(const std::vector<LabeledParagraph>& data, const embed::WordVectorTable& table,
                    const TaggerConfig& config = {});

/// Token-level micro scores over the two positive classes.
struct TagScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

TagScores score_tags(const std::vector<TagSequence>& predicted, const std::vector<TagSequence>& gold);
TagScores evaluate_tagger(const Tagger& model, const std::vector<LabeledParagraph>& data);

}  // namespace wikiseo::injection
