#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "wikiseo/common/binary_scores.hpp"
#include "wikiseo/corpus/edits.hpp"
#include "wikiseo/embed/word_vectors.hpp"
#include "wikiseo/nn/layers.hpp"
#include "wikiseo/target/wiki_api.hpp"

namespace wikiseo::adversary {

using nn::Mat;
using nn::Vec;

struct DetectorConfig {
  int word_dim = 50;
  int projection = 16;
  int head_hidden = 16;
  double learning_rate = 0.005;
  int epochs = 6;
  std::uint64_t seed = 21;
};

/// Inserted paragraph and article lead as word rows, with the wiki's verdict.
struct DetectorExample {
  Mat inserted;
  Mat lead;
  bool damaging = false;
};

/// Self-attention over the inserted paragraph plus a cross-attention match
/// against the article lead; emits (d_True, d_False).
class SubstituteDetector {
 public:
  explicit SubstituteDetector(const DetectorConfig& config);

  /// 1 x 2 row: damaging, not damaging.
  nn::Var probabilities(nn::Tape& tape, nn::Var inserted, const Mat& lead) const;
  double damaging_probability(const Mat& inserted, const Mat& lead) const;

  const DetectorConfig& config() const { return config_; }
  nn::ParameterStore& store() { return store_; }

  void save(std::ostream& os) const;
  static SubstituteDetector load(std::istream& is);

 private:
  DetectorConfig config_;
  nn::ParameterStore store_;
  nn::Linear proj_;
  nn::Mlp head_;
};

/// Attacker-generated edits labeled by querying the wiki's detect().
std::vector<DetectorExample> label_edits(const std::vector<corpus::Edit>& edits, const target::WikiApi& wiki,
                                         const embed::WordVectorTable& table);

/// Cross-entropy training. Throws TrainingError if a class is missing.
SubstituteDetector train_substitute_detector(const std::vector<DetectorExample>& data,
                                             const DetectorConfig& config = {});

/// Agreement with the wiki's labels at probability 0.5.
BinaryScores evaluate_detector(const SubstituteDetector& model, const std::vector<DetectorExample>& data);

}  // namespace wikiseo::adversary
