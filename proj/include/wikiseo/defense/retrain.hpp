#pragma once

#include <utility>
#include <vector>

#include "wikiseo/adversary/attack.hpp"
#include "wikiseo/target/detector.hpp"

namespace wikiseo::defense {

using ArticlePair = std::pair<corpus::Article, corpus::Article>;

/// (before, after) for each revision, rebuilt from the corpus.
std::vector<ArticlePair> revision_edits(const std::vector<adversary::Revision>& revisions, const corpus::Corpus& corpus);

/// Gradient-boosted detector refit on the original training rows plus the
/// given attack revisions labeled damaging. ContractError on an empty
/// revision set.
target::VandalismDetector adversarial_retrain(const std::vector<target::LabeledFeatures>& training_rows,
                                              const std::vector<ArticlePair>& revisions,
                                              const embed::SentenceEncoder& encoder,
                                              const target::GbdtParams& params = {}, double threshold = 0.5);

struct DetectionRates {
  double recall = 0.0;                // flagged share of attack revisions
  double legitimate_accuracy = 0.0;   // unflagged share of legitimate samples
  std::size_t revisions = 0;
  std::size_t legitimate = 0;
};

DetectionRates detection_rates(const std::vector<bool>& revision_flags, const std::vector<bool>& legitimate_flags);

/// Verdicts of a target-style detector on both sample sets.
DetectionRates evaluate_vandalism_detector(const target::VandalismDetector& detector,
                                           const std::vector<ArticlePair>& revisions,
                                           const std::vector<ArticlePair>& legitimate,
                                           const embed::SentenceEncoder& encoder);

}  // namespace wikiseo::defense
