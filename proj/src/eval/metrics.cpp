#include "wikiseo/eval/metrics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>

#include "wikiseo/common/error.hpp"
#include "wikiseo/common/random.hpp"
#include "wikiseo/corpus/text.hpp"

namespace wikiseo::eval {

std::string corpus_fingerprint(const corpus::Corpus& corpus) {
  std::uint64_t h = fnv1a("corpus");
  auto mix = [&h](const corpus::Article& a) {
    h = fnv1a(a.id, h);
    for (const auto& p : a.paragraphs) h = fnv1a(p.text(), fnv1a("\n", h));
  };
  for (const auto& a : corpus.articles()) mix(a);
  h = fnv1a("pool", h);
  for (const auto& a : corpus.pool_articles()) mix(a);
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

ThresholdEstimate compute_thresholds(const corpus::Corpus& corpus, const embed::SentenceEncoder& encoder,
                                     std::size_t count, std::uint64_t seed) {
  require(count >= 1 && count <= corpus.size(), "compute_thresholds: sample must be within the corpus size");
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  order.resize(count);

  double topic = 0.0, consistency = 0.0;
  std::size_t n_topic = 0, n_consistency = 0;
  for (auto i : order) {
    const auto& a = corpus.articles()[i];
    std::vector<embed::Vec> v;
    for (const auto& p : a.paragraphs) v.push_back(encoder.encode(p.tokens()).v);
    if (v.size() < 2) continue;
    double t = 0.0;
    for (std::size_t k = 1; k < v.size(); ++k) t += embed::cosine(v[k], v[0]);
    topic += t / static_cast<double>(v.size() - 1);
    ++n_topic;
    if (v.size() < 3) continue;
    double c = 0.0;
    for (std::size_t k = 1; k + 1 < v.size(); ++k) c += 0.5 * (embed::cosine(v[k], v[k - 1]) + embed::cosine(v[k], v[k + 1]));
    consistency += c / static_cast<double>(v.size() - 2);
    ++n_consistency;
  }
  if (n_topic == 0) throw ContractError("compute_thresholds: no sampled article has two paragraphs");
  ThresholdEstimate out;
  out.topic = topic / static_cast<double>(n_topic);
  out.consistency = n_consistency ? consistency / static_cast<double>(n_consistency) : 0.0;
  out.sample = count;
  out.corpus_id = corpus_fingerprint(corpus);
  return out;
}

MetricsReport compute_metrics(const std::vector<adversary::Revision>& revisions, const adversary::Thresholds& t) {
  require(!revisions.empty(), "compute_metrics: no revisions");
  MetricsReport m;
  m.count = revisions.size();
  for (auto r : revisions) {
    adversary::set_objectives(r, t);
    m.boosted += r.boosted;
    m.evaded += r.evaded;
    m.on_topic += r.on_topic;
    m.consistent += r.consistent;
    m.succeeded += r.success();
  }
  const double n = static_cast<double>(m.count);
  m.rank_boosting_rate = static_cast<double>(m.boosted) / n;
  m.evasion_rate = static_cast<double>(m.evaded) / n;
  m.topic_relevancy_rate = static_cast<double>(m.on_topic) / n;
  m.semantic_consistency_rate = static_cast<double>(m.consistent) / n;
  m.promotion_success_rate = static_cast<double>(m.succeeded) / n;
  return m;
}

std::vector<RankLevel> rank_level_report(const std::vector<adversary::Revision>& revisions) {
  std::map<int, RankLevel> levels;
  std::map<int, double> margin_sum;
  for (const auto& r : revisions) {
    const int b = adversary::rank_bucket(r.rank_before);
    auto& l = levels[b];
    l.bucket = b;
    l.first_rank = b == 0 ? 2 : 100 * b + 1;
    l.last_rank = 100 * (b + 1);
    ++l.count;
    if (r.rank_after > 0 && r.rank_after < r.rank_before) {
      ++l.boosted;
      margin_sum[b] += r.rank_before - r.rank_after;
    }
  }
  std::vector<RankLevel> out;
  for (auto& [b, l] : levels) {
    l.boosting_rate = static_cast<double>(l.boosted) / static_cast<double>(l.count);
    l.mean_margin = l.boosted ? margin_sum[b] / static_cast<double>(l.boosted) : 0.0;
    out.push_back(l);
  }
  return out;
}

double keyword_density(std::size_t phrase_tokens, std::size_t repetitions, std::size_t article_tokens) {
  require(article_tokens > 0, "keyword_density: empty article");
  return static_cast<double>(phrase_tokens) * static_cast<double>(repetitions) / static_cast<double>(article_tokens);
}

std::size_t phrase_count(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size();) {
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
      ++n;
      i += phrase.size();
    } else {
      ++i;
    }
  }
  return n;
}

StuffedParagraph keyword_stuff(const corpus::Paragraph& p, const std::string& query, double target_density,
                               std::size_t article_tokens, std::uint64_t seed) {
  require(target_density > 0.0 && target_density <= 0.05, "keyword_stuff: density must be in (0, 0.05]");
  require(article_tokens > 0, "keyword_stuff: empty article");
  const auto phrase = corpus::tokenize(query);
  require(!phrase.empty(), "keyword_stuff: query has no tokens");
  const std::size_t l = phrase.size();
  const auto needed = static_cast<std::size_t>(
      std::ceil(target_density * static_cast<double>(article_tokens) / static_cast<double>(l) - 1e-12));
  const std::size_t cap = p.tokens().size();

  Rng rng(seed);
  std::string text = p.text();
  std::size_t have = phrase_count(p.tokens(), phrase);
  std::size_t added = 0;
  while (have < needed) {
    if (added + l > cap) {
      throw InfeasibleError("keyword_stuff: density " + std::to_string(target_density) +
                            " needs more tokens than the paragraph holds");
    }
    // Insert after a token that does not open or continue an occurrence.
    const auto spans = corpus::tokenize_spans(text);
    std::vector<bool> inside(spans.size(), false);
    for (std::size_t i = 0; i + l <= spans.size();) {
      bool match = true;
      for (std::size_t j = 0; j < l && match; ++j) match = spans[i + j].text == phrase[j];
      if (!match) {
        ++i;
        continue;
      }
      for (std::size_t j = 0; j + 1 < l; ++j) inside[i + j] = true;
      i += l;
    }
    std::vector<std::size_t> sites;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      if (!inside[i]) sites.push_back(i);
    }
    text.insert(spans[rng.pick(sites)].end, " " + query);
    added += l;
    have = phrase_count(corpus::tokenize(text), phrase);
  }
  StuffedParagraph out{corpus::Paragraph(text), have, 0.0};
  out.density = keyword_density(l, have, article_tokens);
  return out;
}

RevenueEstimate estimate_revenue(double total_views, double view_through_rate, double revenue_per_action) {
  require(total_views >= 0.0 && view_through_rate >= 0.0 && revenue_per_action >= 0.0,
          "estimate_revenue: inputs must be non-negative");
  return {total_views, view_through_rate, revenue_per_action, total_views * view_through_rate * revenue_per_action};
}

ViewTable ViewTable::read(std::istream& is) {
  ViewTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = corpus::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      std::size_t used = 0;
      const int rank = std::stoi(line.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("bad rank");
      const std::string rest = line.substr(comma + 1);
      const double views = std::stod(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("bad views");
      if (rank < 1 || views < 0.0) throw std::invalid_argument("rank must be >= 1 and views >= 0");
      if (!t.views_.emplace(rank, views).second) throw std::invalid_argument("duplicate rank");
    } catch (const std::exception& e) {
      if (lineno == 1 && line.rfind("rank", 0) == 0) continue;  // header
      throw ParseError("view table line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (t.views_.empty()) throw ParseError("view table is empty");
  return t;
}

ViewTable ViewTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("view table not found: " + path.string());
  return read(in);
}

double ViewTable::views(int rank) const {
  require(rank >= 1, "ViewTable: ranks start at 1");
  auto it = views_.upper_bound(rank);
  if (it == views_.begin()) throw LookupError("ViewTable: no entry at or below rank " + std::to_string(rank));
  return std::prev(it)->second;
}

ViewTotals revision_views(const std::vector<adversary::Revision>& revisions, const ViewTable& table) {
  ViewTotals t;
  for (const auto& r : revisions) {
    t.before += table.views(r.rank_before);
    if (r.rank_after > 0) t.after += table.views(r.rank_after);
  }
  return t;
}

}  // namespace wikiseo::eval
