#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "wikiseo/retrieval/network.hpp"

namespace wikiseo::retrieval {

/// A raw paragraph kept for one (query, article) pair. `index` points into
/// the corpus raw-paragraph list.
struct PoolEntry {
  std::size_t index = 0;
  double density = 0.0;   // raw word-vector density against the query
  double semantic = 0.0;  // raw sentence cosine against the article lead

  friend bool operator==(const PoolEntry&, const PoolEntry&) = default;
};

struct CandidatePool {
  std::string query;
  std::string article_id;
  std::vector<PoolEntry> entries;  // ascending index

  friend bool operator==(const CandidatePool&, const CandidatePool&) = default;
};

/// Raw-vector scores of every pool paragraph against a query and a lead;
/// independent of any trained weights.
struct PoolScores {
  std::vector<double> density;
  std::vector<double> semantic;
};

std::vector<double> density_scores(const TextView& query, const std::vector<TextView>& pool, int k);
std::vector<double> semantic_scores(const TextView& lead, const std::vector<TextView>& pool);

/// Union of the best ceil(cap/2) by density and the best ceil(cap/2) by
/// semantic score (ties to lower index), trimmed to `cap`.
CandidatePool prefilter(std::string query, std::string article_id, const std::vector<double>& density,
                        const std::vector<double>& semantic, std::size_t cap);

/// One JSON record per line.
void write_pools(const std::vector<CandidatePool>& pools, std::ostream& os);
std::vector<CandidatePool> read_pools(std::istream& is);

}  // namespace wikiseo::retrieval
