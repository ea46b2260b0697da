#include "wikiseo/retrieval/pool.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include <json.hpp>

#include "wikiseo/common/error.hpp"
#include "wikiseo/embed/sentence.hpp"

namespace wikiseo::retrieval {

namespace {

std::vector<std::size_t> best(const std::vector<double>& s, std::size_t n) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  n = std::min(n, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                    [&s](std::size_t a, std::size_t b) { return s[a] > s[b] || (s[a] == s[b] && a < b); });
  idx.resize(n);
  return idx;
}

}  // namespace

std::vector<double> density_scores(const TextView& query, const std::vector<TextView>& pool, int k) {
  std::vector<double> out;
  out.reserve(pool.size());
  for (const TextView& p : pool) out.push_back(word_density(query.words, p.words, k));
  return out;
}

std::vector<double> semantic_scores(const TextView& lead, const std::vector<TextView>& pool) {
  std::vector<double> out;
  out.reserve(pool.size());
  for (const TextView& p : pool) out.push_back(embed::cosine(lead.sentence, p.sentence));
  return out;
}

CandidatePool prefilter(std::string query, std::string article_id, const std::vector<double>& density,
                        const std::vector<double>& semantic, std::size_t cap) {
  require(density.size() == semantic.size(), "prefilter: score lists differ in length");
  require(cap >= 1, "prefilter: cap must be positive");
  const std::size_t half = (cap + 1) / 2;
  const auto by_density = best(density, half);
  const auto by_semantic = best(semantic, half);
  // Interleave so that trimming to cap drops from both lists evenly.
  std::vector<std::size_t> order;
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < half; ++i) {
    for (const auto* list : {&by_density, &by_semantic}) {
      if (i < list->size() && seen.insert((*list)[i]).second) order.push_back((*list)[i]);
    }
  }
  if (order.size() > cap) order.resize(cap);
  std::sort(order.begin(), order.end());
  CandidatePool pool{std::move(query), std::move(article_id), {}};
  for (auto i : order) pool.entries.push_back(PoolEntry{i, density[i], semantic[i]});
  return pool;
}

void write_pools(const std::vector<CandidatePool>& pools, std::ostream& os) {
  for (const auto& p : pools) {
    nlohmann::ordered_json rec;
    rec["query"] = p.query;
    rec["article"] = p.article_id;
    auto& arr = rec["candidates"] = nlohmann::ordered_json::array();
    for (const auto& e : p.entries) {
      arr.push_back({{"paragraph", e.index}, {"density", e.density}, {"semantic", e.semantic}});
    }
    os << rec.dump() << '\n';
  }
}

std::vector<CandidatePool> read_pools(std::istream& is) {
  std::vector<CandidatePool> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      CandidatePool p{rec.at("query"), rec.at("article"), {}};
      for (const auto& c : rec.at("candidates")) {
        p.entries.push_back(PoolEntry{c.at("paragraph"), c.at("density"), c.at("semantic")});
      }
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("candidate pools line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace wikiseo::retrieval
