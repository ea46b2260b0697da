#include "wikiseo/defense/retrain.hpp"

#include "wikiseo/common/error.hpp"
#include "wikiseo/target/features.hpp"

namespace wikiseo::defense {

std::vector<ArticlePair> revision_edits(const std::vector<adversary::Revision>& revisions,
                                        const corpus::Corpus& corpus) {
  std::vector<ArticlePair> out;
  out.reserve(revisions.size());
  for (const auto& r : revisions) {
    const corpus::Article& before = corpus.at(r.article_id);
    out.emplace_back(before, adversary::revised_article(before, r));
  }
  return out;
}

target::VandalismDetector adversarial_retrain(const std::vector<target::LabeledFeatures>& training_rows,
                                              const std::vector<ArticlePair>& revisions,
                                              const embed::SentenceEncoder& encoder,
                                              const target::GbdtParams& params, double threshold) {
  require(!revisions.empty(), "adversarial_retrain: no attack revisions");
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (const auto& r : training_rows) {
    x.push_back(r.features);
    y.push_back(r.damaging);
  }
  for (const auto& [before, after] : revisions) {
    x.push_back(target::edit_features(before, after, encoder));
    y.push_back(1);
  }
  return target::VandalismDetector(target::Gbdt::fit(x, y, params), threshold);
}

DetectionRates detection_rates(const std::vector<bool>& revision_flags, const std::vector<bool>& legitimate_flags) {
  require(!revision_flags.empty() && !legitimate_flags.empty(), "detection_rates: empty sample set");
  DetectionRates r;
  r.revisions = revision_flags.size();
  r.legitimate = legitimate_flags.size();
  std::size_t hit = 0, clean = 0;
  for (bool f : revision_flags) hit += f;
  for (bool f : legitimate_flags) clean += !f;
  r.recall = static_cast<double>(hit) / static_cast<double>(r.revisions);
  r.legitimate_accuracy = static_cast<double>(clean) / static_cast<double>(r.legitimate);
  return r;
}

DetectionRates evaluate_vandalism_detector(const target::VandalismDetector& detector,
                                           const std::vector<ArticlePair>& revisions,
                                           const std::vector<ArticlePair>& legitimate,
                                           const embed::SentenceEncoder& encoder) {
  std::vector<bool> a, b;
  for (const auto& [before, after] : revisions) a.push_back(detector.detect(before, after, encoder).damaging);
  for (const auto& [before, after] : legitimate) b.push_back(detector.detect(before, after, encoder).damaging);
  return detection_rates(a, b);
}

}  // namespace wikiseo::defense
