#include "wikiseo/eval/config.hpp"

#include <fstream>
#include <istream>
#include <set>

#include <json.hpp>

#include "wikiseo/common/error.hpp"
#include "wikiseo/common/random.hpp"

namespace wikiseo::eval {

using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t component, std::string_view salt) {
  std::uint64_t h = fnv1a(salt);
  h ^= master + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  h ^= component + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  return h;
}

namespace {

// Reads known keys of one JSON object and rejects the rest.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError("config: " + where() + " must be an object");
  }

  template <class T>
  Fields& get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return *this;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ParseError("config: bad value at " + path_ + "." + key + ": " + e.what());
    }
    return *this;
  }

  template <class T>
  Fields& get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return *this;
    T v{};
    get(key, v);
    out = v;
    return *this;
  }

  Fields sub(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Fields(j_.contains(key) ? j_.at(key) : empty, path_ + "." + key);
  }

  ~Fields() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ParseError("config: unknown key " + path_ + "." + k);
    }
  }

 private:
  std::string where() const { return path_.empty() ? "root" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_gbdt(Fields f, target::GbdtParams& p) {
  f.get("trees", p.trees).get("max_depth", p.max_depth).get("learning_rate", p.learning_rate)
      .get("min_leaf", p.min_leaf).get("l2", p.l2);
}

}  // namespace

ExperimentConfig read_config(std::istream& is) {
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  {
    Fields root(j, "config");
    root.get("seed", c.seed);
    {
      auto f = root.sub("corpus");
      auto& x = c.corpus;
      f.get("articles", x.articles).get("seed", x.seed).get("path", x.path).get("queries", x.queries)
          .get("query_seed", x.query_seed).get("queries_path", x.queries_path).get("promos", x.promos)
          .get("word_vectors", x.word_vectors);
    }
    root.sub("split").get("train_share", c.split.train_share).get("seed", c.split.seed);
    {
      auto f = root.sub("target");
      f.get("edits", c.target.edits).get("edit_seed", c.target.edit_seed).get("holdout", c.target.holdout);
      read_gbdt(f.sub("gbdt"), c.target.gbdt);
    }
    {
      auto f = root.sub("ranker");
      auto& m = c.ranker.model;
      f.get("depth", c.ranker.depth).get("word_dim", m.word_dim).get("hidden", m.hidden).get("kmax", m.kmax)
          .get("head_hidden", m.head_hidden).get("max_doc_tokens", m.max_doc_tokens)
          .get("learning_rate", m.learning_rate).get("epochs", m.epochs).get("per_query", m.per_query)
          .get("seed", m.seed);
    }
    {
      auto f = root.sub("substitute_detector");
      auto& m = c.detector.model;
      f.get("edits", c.detector.edits).get("edit_seed", c.detector.edit_seed).get("word_dim", m.word_dim)
          .get("projection", m.projection).get("head_hidden", m.head_hidden).get("learning_rate", m.learning_rate)
          .get("epochs", m.epochs).get("seed", m.seed);
    }
    {
      auto f = root.sub("tagger");
      auto& m = c.tagger.model;
      f.get("examples", c.tagger.examples).get("data_seed", c.tagger.seed).get("hidden", m.hidden)
          .get("outer_dim", m.outer_dim).get("learning_rate", m.learning_rate).get("epochs", m.epochs)
          .get("seed", m.seed);
    }
    {
      auto f = root.sub("retrieval");
      auto& m = c.retrieval.model;
      auto& t = c.retrieval.training;
      f.get("word_dim", m.word_dim).get("hidden", m.hidden).get("latent", m.latent).get("word_latent", m.word_latent)
          .get("pool_k", m.pool_k).get("top_k", m.top_k).get("seed", m.seed).get("epochs", t.epochs)
          .get("learning_rate", t.learning_rate).get("pool_cap", t.pool_cap).get("full_gradient", t.full_gradient)
          .get("alternating", t.alternating).get("training_seed", t.seed);
    }
    {
      auto f = root.sub("attack");
      auto& a = c.attack;
      f.get("per_bucket", a.per_bucket).get("depth", a.depth).get("pool_cap", a.pool_cap)
          .get("instance_seed", a.instance_seed).get("seed", a.seed).get("keyword_density", a.keyword_density);
    }
    root.sub("thresholds").get("sample", c.thresholds.sample).get("seed", c.thresholds.seed)
        .get("topic", c.thresholds.topic).get("consistency", c.thresholds.consistency);
    {
      auto f = root.sub("coherence");
      auto& m = c.coherence.model;
      f.get("triplets", c.coherence.triplets).get("triplet_seed", c.coherence.triplet_seed)
          .get("legitimate_seed", c.coherence.legitimate_seed).get("margin", c.coherence.margin)
          .get("grid_hidden", m.grid_hidden).get("pair_hidden", m.pair_hidden).get("head_hidden", m.head_hidden)
          .get("learning_rate", m.learning_rate).get("epochs", m.epochs).get("holdout", m.holdout).get("seed", m.seed);
    }
    root.sub("adv_train").get("legitimate_seed", c.adv_train.legitimate_seed);
    root.sub("revenue").get("view_table", c.revenue.view_table).get("view_through_rate", c.revenue.view_through_rate)
        .get("revenue_per_action", c.revenue.revenue_per_action);
  }
  require(c.corpus.articles >= 2 && c.corpus.queries >= 2, "config: need at least two articles and two queries");
  if (c.split.train_share <= 0.0 || c.split.train_share >= 1.0) throw ParseError("config: split.train_share must be in (0, 1)");
  if (c.attack.keyword_density <= 0.0 || c.attack.keyword_density > 0.05) {
    throw ParseError("config: attack.keyword_density must be in (0, 0.05]");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("config not found: " + path.string());
  return read_config(in);
}

std::string config_json(const ExperimentConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  const auto& g = c.target.gbdt;
  const auto& rk = c.ranker.model;
  const auto& d = c.detector.model;
  const auto& tg = c.tagger.model;
  const auto& rm = c.retrieval.model;
  const auto& rt = c.retrieval.training;
  const auto& cm = c.coherence.model;
  ordered_json j = {
      {"seed", c.seed},
      {"corpus",
       {{"articles", c.corpus.articles}, {"seed", c.corpus.seed}, {"path", c.corpus.path},
        {"queries", c.corpus.queries}, {"query_seed", c.corpus.query_seed}, {"queries_path", c.corpus.queries_path},
        {"promos", c.corpus.promos}, {"word_vectors", c.corpus.word_vectors}}},
      {"split", {{"train_share", c.split.train_share}, {"seed", c.split.seed}}},
      {"target",
       {{"edits", c.target.edits}, {"edit_seed", c.target.edit_seed}, {"holdout", c.target.holdout},
        {"gbdt", {{"trees", g.trees}, {"max_depth", g.max_depth}, {"learning_rate", g.learning_rate},
                  {"min_leaf", g.min_leaf}, {"l2", g.l2}}}}},
      {"ranker",
       {{"depth", c.ranker.depth}, {"word_dim", rk.word_dim}, {"hidden", rk.hidden}, {"kmax", rk.kmax},
        {"head_hidden", rk.head_hidden}, {"max_doc_tokens", rk.max_doc_tokens}, {"learning_rate", rk.learning_rate},
        {"epochs", rk.epochs}, {"per_query", rk.per_query}, {"seed", rk.seed}}},
      {"substitute_detector",
       {{"edits", c.detector.edits}, {"edit_seed", c.detector.edit_seed}, {"word_dim", d.word_dim},
        {"projection", d.projection}, {"head_hidden", d.head_hidden}, {"learning_rate", d.learning_rate},
        {"epochs", d.epochs}, {"seed", d.seed}}},
      {"tagger",
       {{"examples", c.tagger.examples}, {"data_seed", c.tagger.seed}, {"hidden", tg.hidden},
        {"outer_dim", tg.outer_dim}, {"learning_rate", tg.learning_rate}, {"epochs", tg.epochs}, {"seed", tg.seed}}},
      {"retrieval",
       {{"word_dim", rm.word_dim}, {"hidden", rm.hidden}, {"latent", rm.latent}, {"word_latent", rm.word_latent},
        {"pool_k", rm.pool_k}, {"top_k", rm.top_k}, {"seed", rm.seed}, {"epochs", rt.epochs},
        {"learning_rate", rt.learning_rate}, {"pool_cap", rt.pool_cap}, {"full_gradient", rt.full_gradient},
        {"alternating", rt.alternating}, {"training_seed", rt.seed}}},
      {"attack",
       {{"per_bucket", c.attack.per_bucket}, {"depth", c.attack.depth}, {"pool_cap", c.attack.pool_cap},
        {"instance_seed", c.attack.instance_seed}, {"seed", c.attack.seed},
        {"keyword_density", c.attack.keyword_density}}},
      {"thresholds",
       {{"sample", c.thresholds.sample}, {"seed", c.thresholds.seed}, {"topic", opt(c.thresholds.topic)},
        {"consistency", opt(c.thresholds.consistency)}}},
      {"coherence",
       {{"triplets", c.coherence.triplets}, {"triplet_seed", c.coherence.triplet_seed},
        {"legitimate_seed", c.coherence.legitimate_seed}, {"margin", c.coherence.margin},
        {"grid_hidden", cm.grid_hidden}, {"pair_hidden", cm.pair_hidden}, {"head_hidden", cm.head_hidden},
        {"learning_rate", cm.learning_rate}, {"epochs", cm.epochs}, {"holdout", cm.holdout}, {"seed", cm.seed}}},
      {"adv_train", {{"legitimate_seed", c.adv_train.legitimate_seed}}},
      {"revenue",
       {{"view_table", c.revenue.view_table}, {"view_through_rate", c.revenue.view_through_rate},
        {"revenue_per_action", c.revenue.revenue_per_action}}}};
  return j.dump(2);
}

}  // namespace wikiseo::eval
