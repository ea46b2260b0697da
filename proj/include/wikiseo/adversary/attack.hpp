#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wikiseo/adversary/detector.hpp"
#include "wikiseo/corpus/article.hpp"
#include "wikiseo/embed/sentence.hpp"
#include "wikiseo/injection/tagger.hpp"
#include "wikiseo/retrieval/network.hpp"
#include "wikiseo/retrieval/pool.hpp"
#include "wikiseo/target/wiki_api.hpp"

namespace wikiseo::adversary {

/// One (query, article) pair to promote `promo` into.
struct Instance {
  std::string query;
  std::string article_id;
  int rank_before = 0;
  std::string promo;

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Rank levels 2-100, 101-200, 201-300, ... as 0, 1, 2, ...
int rank_bucket(int rank);

struct BucketCoverage {
  std::string query;
  int bucket = 0;
  std::size_t available = 0;
  std::size_t taken = 0;
};

/// Up to `per_bucket` results per rank level from each query's top `depth`
/// (rank 1 excluded: it cannot improve). Each instance gets a seeded promo.
std::vector<Instance> sample_instances(const target::WikiApi& wiki, const std::vector<std::string>& queries,
                                       const std::vector<std::string>& promos, std::size_t per_bucket,
                                       std::size_t depth, std::uint64_t seed,
                                       std::vector<BucketCoverage>* coverage = nullptr);

/// Seeded disjoint split; the first list gets round(share * n) queries.
std::pair<std::vector<std::string>, std::vector<std::string>> split_queries(std::vector<std::string> queries,
                                                                             double share, std::uint64_t seed);

/// A promotion paragraph: a raw pool paragraph after injection.
struct Candidate {
  std::size_t pool_index = 0;
  corpus::Paragraph paragraph;
  retrieval::TextView view;
};

/// Attacker-side state shared by training and attacks: corpus text, word
/// vectors of the raw pool and the injection tagger. Immutable.
class AttackContext {
 public:
  AttackContext(const corpus::Corpus& corpus, const embed::MeanPoolEncoder& encoder, const injection::Tagger& tagger);

  const corpus::Corpus& corpus() const { return *corpus_; }
  const embed::MeanPoolEncoder& encoder() const { return *encoder_; }

  retrieval::TextView view(const std::vector<std::string>& tokens) const;
  retrieval::TextView query_view(const std::string& query) const;
  /// Views of the article's paragraphs, in order.
  std::vector<retrieval::TextView> paragraph_views(const corpus::Article& a) const;

  retrieval::CandidatePool pool(const Instance& inst, std::size_t cap, int density_k = 3) const;
  /// Injects the promo into each pooled paragraph; paragraphs without an
  /// eligible site are dropped.
  std::vector<Candidate> candidates(const Instance& inst, const retrieval::CandidatePool& pool) const;

 private:
  const corpus::Corpus* corpus_;
  const embed::MeanPoolEncoder* encoder_;
  const injection::Tagger* tagger_;
  std::vector<retrieval::TextView> raw_views_;
};

struct Thresholds {
  double topic = 0.0;
  double consistency = 0.0;
};

/// One published edit and everything measured about it.
struct Revision {
  std::string method;
  std::string query;
  std::string article_id;
  std::string promo;
  std::size_t pool_index = 0;
  std::string paragraph;
  std::size_t insertion_index = 0;  // inserted between paragraphs I and I+1
  int rank_before = 0;
  int rank_after = 0;  // 0 when the article dropped out of the results
  double target_probability = 0.0;
  bool target_damaging = false;
  double substitute_probability = 0.0;
  double topic_similarity = 0.0;
  double neighbor_similarity = 0.0;
  bool boosted = false;
  bool evaded = false;
  bool on_topic = false;
  bool consistent = false;

  bool success() const { return boosted && evaded && on_topic && consistent; }
  friend bool operator==(const Revision&, const Revision&) = default;
};

/// Sets the four objective flags from the measured fields.
void set_objectives(Revision& r, const Thresholds& t);

/// The article with the revision's paragraph inserted.
corpus::Article revised_article(const corpus::Article& before, const Revision& r);

/// Publishes `candidate` into the article at the position the retrieval
/// network picks and measures the outcome through the wiki's public calls.
/// Throws InfeasibleError if the article is not in the query's results.
Revision realize(const AttackContext& ctx, const target::WikiApi& wiki, const retrieval::RetrievalNetwork& net,
                 const SubstituteDetector& detector, const Instance& inst, const Candidate& candidate,
                 std::string method, const Thresholds& thresholds);

/// Extra method run on the same candidates. `draw` is the instance's
/// random draw; `pick` may throw InfeasibleError.
struct Baseline {
  std::string method;
  std::function<Candidate(const Instance& inst, const std::vector<Candidate>& candidates, std::size_t draw)> pick;
};

/// Paired outcomes on identical candidate pools.
struct AttackRun {
  std::vector<Revision> mawseo;
  std::vector<Revision> random;
  std::map<std::string, std::vector<Revision>> baselines;
  std::size_t infeasible = 0;
  std::map<std::string, std::size_t> baseline_infeasible;
  /// Pools of all instances, in order, when requested.
  std::vector<retrieval::CandidatePool> pools;
};

/// Network argmax versus a seeded uniform pick over the same candidates.
AttackRun run_attacks(const AttackContext& ctx, const target::WikiApi& wiki, const retrieval::RetrievalNetwork& net,
                      const SubstituteDetector& detector, const std::vector<Instance>& instances,
                      const Thresholds& thresholds, std::size_t pool_cap, std::uint64_t seed,
                      const std::vector<Baseline>& baselines = {}, bool keep_pools = false);

/// Single attack; throws InfeasibleError when no candidate survives injection.
Revision attack(const AttackContext& ctx, const target::WikiApi& wiki, const retrieval::RetrievalNetwork& net,
                const SubstituteDetector& detector, const Instance& inst, const Thresholds& thresholds,
                std::size_t pool_cap);

/// One JSON record per line.
void write_revisions(const std::vector<Revision>& revisions, std::ostream& os);
std::vector<Revision> read_revisions(std::istream& is);

}  // namespace wikiseo::adversary
