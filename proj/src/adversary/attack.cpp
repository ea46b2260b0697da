#include "wikiseo/adversary/attack.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "wikiseo/common/error.hpp"
#include "wikiseo/common/random.hpp"
#include "wikiseo/corpus/text.hpp"
#include "wikiseo/injection/inject.hpp"

namespace wikiseo::adversary {

using retrieval::TextView;

int rank_bucket(int rank) {
  require(rank >= 2, "rank_bucket: rank 1 has no bucket");
  return rank <= 100 ? 0 : (rank - 1) / 100;
}

std::vector<Instance> sample_instances(const target::WikiApi& wiki, const std::vector<std::string>& queries,
                                       const std::vector<std::string>& promos, std::size_t per_bucket,
                                       std::size_t depth, std::uint64_t seed, std::vector<BucketCoverage>* coverage) {
  require(!promos.empty(), "sample_instances: no promotional content");
  Rng rng(seed);
  std::vector<Instance> out;
  for (const auto& q : queries) {
    std::map<int, std::vector<target::RankedResult>> buckets;
    for (auto& r : wiki.search(q, depth)) {
      if (r.score > 0.0 && r.rank >= 2) buckets[rank_bucket(r.rank)].push_back(std::move(r));
    }
    std::vector<target::RankedResult> taken;
    for (auto& [b, hits] : buckets) {
      const std::size_t available = hits.size();
      rng.shuffle(hits);
      if (hits.size() > per_bucket) hits.resize(per_bucket);
      if (coverage) coverage->push_back({q, b, available, hits.size()});
      taken.insert(taken.end(), hits.begin(), hits.end());
    }
    std::sort(taken.begin(), taken.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
    for (const auto& r : taken) out.push_back({q, r.article_id, r.rank, rng.pick(promos)});
  }
  return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_queries(std::vector<std::string> queries,
                                                                             double share, std::uint64_t seed) {
  require(share >= 0.0 && share <= 1.0, "split_queries: share must be in [0, 1]");
  Rng rng(seed);
  rng.shuffle(queries);
  const auto n = static_cast<std::size_t>(std::lround(share * static_cast<double>(queries.size())));
  std::vector<std::string> first(queries.begin(), queries.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<std::string> second(queries.begin() + static_cast<std::ptrdiff_t>(n), queries.end());
  return {std::move(first), std::move(second)};
}

AttackContext::AttackContext(const corpus::Corpus& corpus, const embed::MeanPoolEncoder& encoder,
                             const injection::Tagger& tagger)
    : corpus_(&corpus), encoder_(&encoder), tagger_(&tagger) {
  raw_views_.reserve(corpus.raw_paragraphs().size());
  for (const auto& r : corpus.raw_paragraphs()) {
    // Token-free pool entries get a placeholder that never wins a prefilter slot.
    raw_views_.push_back(r.paragraph.tokens().empty() ? TextView{Mat::Zero(1, encoder.dimension()),
                                                                 Vec::Zero(encoder.dimension())}
                                                      : view(r.paragraph.tokens()));
  }
}

TextView AttackContext::view(const std::vector<std::string>& tokens) const {
  return retrieval::view_of(tokens, *encoder_);
}

TextView AttackContext::query_view(const std::string& query) const { return view(corpus::tokenize(query)); }

std::vector<TextView> AttackContext::paragraph_views(const corpus::Article& a) const {
  std::vector<TextView> out;
  for (const auto& p : a.paragraphs) out.push_back(view(p.tokens()));
  return out;
}

retrieval::CandidatePool AttackContext::pool(const Instance& inst, std::size_t cap, int density_k) const {
  const TextView q = query_view(inst.query);
  const TextView lead = view(corpus::lead_paragraph(corpus_->at(inst.article_id)).tokens());
  return retrieval::prefilter(inst.query, inst.article_id, retrieval::density_scores(q, raw_views_, density_k),
                              retrieval::semantic_scores(lead, raw_views_), cap);
}

std::vector<Candidate> AttackContext::candidates(const Instance& inst, const retrieval::CandidatePool& pool) const {
  std::vector<Candidate> out;
  for (const auto& e : pool.entries) {
    const corpus::Paragraph& raw = corpus_->raw_paragraphs().at(e.index).paragraph;
    if (raw.tokens().empty()) continue;
    injection::InjectionInputs in(raw, inst.promo, inst.query);
    const auto tags = tagger_->tag(in);
    const std::uint64_t seed = fnv1a(inst.query + '\n' + inst.article_id + '\n' + std::to_string(e.index));
    try {
      corpus::Paragraph p = injection::inject(in, tags, seed);
      TextView v = view(p.tokens());
      out.push_back({e.index, std::move(p), std::move(v)});
    } catch (const InfeasibleError&) {
    }
  }
  return out;
}

void set_objectives(Revision& r, const Thresholds& t) {
  r.boosted = r.rank_after > 0 && r.rank_after < r.rank_before;
  r.evaded = !r.target_damaging;
  r.on_topic = r.topic_similarity >= t.topic;
  r.consistent = r.neighbor_similarity >= t.consistency;
}

corpus::Article revised_article(const corpus::Article& before, const Revision& r) {
  return corpus::apply_revision(before, corpus::Paragraph(r.paragraph), r.insertion_index);
}

Revision realize(const AttackContext& ctx, const target::WikiApi& wiki, const retrieval::RetrievalNetwork& net,
                 const SubstituteDetector& detector, const Instance& inst, const Candidate& candidate,
                 std::string method, const Thresholds& thresholds) {
  const corpus::Article& before = ctx.corpus().at(inst.article_id);
  const auto rank = wiki.rank_of(inst.query, inst.article_id);
  if (!rank) throw InfeasibleError("attack: " + inst.article_id + " is not in the results for " + inst.query);
  const auto views = ctx.paragraph_views(before);
  std::vector<Vec> reps;
  for (const auto& v : views) reps.push_back(net.representation(v));
  const auto choice = retrieval::insertion_position(reps, net.representation(candidate.view));

  Revision r;
  r.method = std::move(method);
  r.query = inst.query;
  r.article_id = inst.article_id;
  r.promo = inst.promo;
  r.pool_index = candidate.pool_index;
  r.paragraph = candidate.paragraph.text();
  r.insertion_index = choice.index;
  r.rank_before = *rank;
  const corpus::Article after = corpus::apply_revision(before, candidate.paragraph, choice.index);
  r.rank_after = wiki.with_edit(after)->rank_of(inst.query, inst.article_id).value_or(0);
  const auto verdict = wiki.detect(before, after);
  r.target_probability = verdict.damaging_probability;
  r.target_damaging = verdict.damaging;
  r.substitute_probability = detector.damaging_probability(candidate.view.words, views.front().words);
  const Vec& p = candidate.view.sentence;
  r.topic_similarity = embed::cosine(p, views.front().sentence);
  r.neighbor_similarity = 0.5 * (embed::cosine(p, views[choice.index].sentence) +
                                 embed::cosine(p, views[choice.index + 1].sentence));
  set_objectives(r, thresholds);
  return r;
}

namespace {

std::vector<TextView> views_of(const std::vector<Candidate>& cands) {
  std::vector<TextView> out;
  out.reserve(cands.size());
  for (const auto& c : cands) out.push_back(c.view);
  return out;
}

}  // namespace

Revision attack(const AttackContext& ctx, const target::WikiApi& wiki, const retrieval::RetrievalNetwork& net,
                const SubstituteDetector& detector, const Instance& inst, const Thresholds& thresholds,
                std::size_t pool_cap) {
  const auto cands = ctx.candidates(inst, ctx.pool(inst, pool_cap));
  if (cands.empty()) throw InfeasibleError("attack: no injectable paragraph for " + inst.article_id);
  const corpus::Article& a = ctx.corpus().at(inst.article_id);
  const auto out = net.select(ctx.query_view(inst.query), ctx.view(corpus::lead_paragraph(a).tokens()), views_of(cands));
  return realize(ctx, wiki, net, detector, inst, cands[out.argmax_index], "mawseo", thresholds);
}

AttackRun run_attacks(const AttackContext& ctx, const target::WikiApi& wiki, const retrieval::RetrievalNetwork& net,
                      const SubstituteDetector& detector, const std::vector<Instance>& instances,
                      const Thresholds& thresholds, std::size_t pool_cap, std::uint64_t seed,
                      const std::vector<Baseline>& baselines, bool keep_pools) {
  AttackRun run;
  for (const auto& b : baselines) {
    run.baselines[b.method];
    run.baseline_infeasible[b.method] = 0;
  }
  Rng rng(seed);
  for (const auto& inst : instances) {
    const std::size_t draw = rng.next();  // one draw per instance keeps picks aligned across runs
    auto pool = ctx.pool(inst, pool_cap);
    const auto cands = ctx.candidates(inst, pool);
    if (keep_pools) run.pools.push_back(std::move(pool));
    try {
      if (cands.empty()) throw InfeasibleError("no injectable paragraph");
      const corpus::Article& a = ctx.corpus().at(inst.article_id);
      const auto out =
          net.select(ctx.query_view(inst.query), ctx.view(corpus::lead_paragraph(a).tokens()), views_of(cands));
      Revision m = realize(ctx, wiki, net, detector, inst, cands[out.argmax_index], "mawseo", thresholds);
      Revision r = realize(ctx, wiki, net, detector, inst, cands[draw % cands.size()], "random", thresholds);
      run.mawseo.push_back(std::move(m));
      run.random.push_back(std::move(r));
    } catch (const InfeasibleError&) {
      ++run.infeasible;
      continue;
    }
    for (const auto& b : baselines) {
      try {
        run.baselines[b.method].push_back(
            realize(ctx, wiki, net, detector, inst, b.pick(inst, cands, draw), b.method, thresholds));
      } catch (const InfeasibleError&) {
        ++run.baseline_infeasible[b.method];
      }
    }
  }
  return run;
}

void write_revisions(const std::vector<Revision>& revisions, std::ostream& os) {
  for (const auto& r : revisions) {
    nlohmann::ordered_json j = {{"method", r.method},
                                {"query", r.query},
                                {"article", r.article_id},
                                {"promo", r.promo},
                                {"pool_index", r.pool_index},
                                {"paragraph", r.paragraph},
                                {"insertion_index", r.insertion_index},
                                {"rank_before", r.rank_before},
                                {"rank_after", r.rank_after},
                                {"target_probability", r.target_probability},
                                {"target_damaging", r.target_damaging},
                                {"substitute_probability", r.substitute_probability},
                                {"topic_sim", r.topic_similarity},
                                {"neighbor_sim", r.neighbor_similarity},
                                {"boosted", r.boosted},
                                {"evaded", r.evaded},
                                {"on_topic", r.on_topic},
                                {"consistent", r.consistent}};
    os << j.dump() << '\n';
  }
}

std::vector<Revision> read_revisions(std::istream& is) {
  std::vector<Revision> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Revision r;
      r.method = j.at("method");
      r.query = j.at("query");
      r.article_id = j.at("article");
      r.promo = j.at("promo");
      r.pool_index = j.at("pool_index");
      r.paragraph = j.at("paragraph");
      r.insertion_index = j.at("insertion_index");
      r.rank_before = j.at("rank_before");
      r.rank_after = j.at("rank_after");
      r.target_probability = j.at("target_probability");
      r.target_damaging = j.at("target_damaging");
      r.substitute_probability = j.at("substitute_probability");
      r.topic_similarity = j.at("topic_sim");
      r.neighbor_similarity = j.at("neighbor_sim");
      r.boosted = j.at("boosted");
      r.evaded = j.at("evaded");
      r.on_topic = j.at("on_topic");
      r.consistent = j.at("consistent");
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("revision log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace wikiseo::adversary
