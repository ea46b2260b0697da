#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "wikiseo/adversary/attack.hpp"
#include "wikiseo/corpus/article.hpp"
#include "wikiseo/embed/sentence.hpp"

namespace wikiseo::eval {

struct ThresholdEstimate {
  double topic = 0.0;
  double consistency = 0.0;
  std::size_t sample = 0;
  std::string corpus_id;

  adversary::Thresholds thresholds() const { return {topic, consistency}; }
};

/// Hex digest of every article and pool record.
std::string corpus_fingerprint(const corpus::Corpus& corpus);

/// Topic: mean over `count` sampled articles of the mean cosine between each
/// non-lead paragraph and the lead. Consistency: mean over sampled articles
/// with interior paragraphs of the mean, over those paragraphs, of the
/// average cosine to both neighbours.
ThresholdEstimate compute_thresholds(const corpus::Corpus& corpus, const embed::SentenceEncoder& encoder,
                                     std::size_t count, std::uint64_t seed);

struct MetricsReport {
  std::size_t count = 0;
  std::size_t boosted = 0;
  std::size_t evaded = 0;
  std::size_t on_topic = 0;
  std::size_t consistent = 0;
  std::size_t succeeded = 0;
  double rank_boosting_rate = 0.0;
  double evasion_rate = 0.0;
  double topic_relevancy_rate = 0.0;
  double semantic_consistency_rate = 0.0;
  double promotion_success_rate = 0.0;
};

/// Objectives are re-derived from each revision's raw fields and the given
/// thresholds; stored flags are ignored. ContractError on an empty list.
MetricsReport compute_metrics(const std::vector<adversary::Revision>& revisions, const adversary::Thresholds& t);

struct RankLevel {
  int bucket = 0;  // 0: ranks 2-100, 1: 101-200, ...
  int first_rank = 0;
  int last_rank = 0;
  std::size_t count = 0;
  std::size_t boosted = 0;
  double boosting_rate = 0.0;
  /// Mean of rank_before - rank_after over boosted revisions (0 if none).
  double mean_margin = 0.0;
};

std::vector<RankLevel> rank_level_report(const std::vector<adversary::Revision>& revisions);

/// d = l * f / T
double keyword_density(std::size_t phrase_tokens, std::size_t repetitions, std::size_t article_tokens);

/// Non-overlapping occurrences of `phrase` in `tokens`.
std::size_t phrase_count(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase);

struct StuffedParagraph {
  corpus::Paragraph paragraph;
  std::size_t repetitions = 0;  // occurrences of the query phrase in the output
  double density = 0.0;         // l * repetitions / article_tokens
};

/// Repeats `query` after seeded random words of `p` until l * f / T >= d.
/// Requires 0 < d <= 0.05. InfeasibleError if that needs more added tokens
/// than the paragraph has.
StuffedParagraph keyword_stuff(const corpus::Paragraph& p, const std::string& query, double target_density,
                               std::size_t article_tokens, std::uint64_t seed);

struct RevenueEstimate {
  double total_views = 0.0;
  double view_through_rate = 0.0;
  double revenue_per_action = 0.0;
  double revenue = 0.0;
};

/// R = V * r_v * R_a; all inputs non-negative.
RevenueEstimate estimate_revenue(double total_views, double view_through_rate, double revenue_per_action);

/// Mean 30-day views by search rank, read from "rank,views" lines.
class ViewTable {
 public:
  static ViewTable read(std::istream& is);
  static ViewTable load(const std::filesystem::path& path);
  /// Views at `rank`; ranks past the table get the last entry's volume.
  double views(int rank) const;
  std::size_t size() const { return views_.size(); }

 private:
  std::map<int, double> views_;
};

/// Summed views of the attacked articles at their pre- and post-attack
/// ranks. A revision whose article left the results adds nothing after.
struct ViewTotals {
  double before = 0.0;
  double after = 0.0;
};

ViewTotals revision_views(const std::vector<adversary::Revision>& revisions, const ViewTable& table);

}  // namespace wikiseo::eval
