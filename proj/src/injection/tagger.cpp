#include "wikiseo/injection/tagger.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "wikiseo/common/error.hpp"
#include "wikiseo/common/random.hpp"
#include "wikiseo/corpus/text.hpp"
#include "wikiseo/nn/crf.hpp"

namespace wikiseo::injection {

using nn::Mat;
using nn::Tape;
using nn::Var;

namespace {

constexpr int kCueCount = 3;

std::vector<int> as_ints(const TagSequence& tags) {
  std::vector<int> out;
  for (auto t : tags) out.push_back(static_cast<int>(t));
  return out;
}

}  // namespace

Tagger::Tagger(const embed::WordVectorTable& table, const TaggerConfig& config) : table_(&table), config_(config) {
  Rng rng(config.seed);
  const Eigen::Index d = table.dimension();
  encoder_ = nn::BiLstm(store_, "encoder", d + kCueCount, config.hidden, rng);
  const Eigen::Index h2 = 2 * config.hidden;
  outer_proj_ = nn::Linear(store_, "outer_proj", d, config.outer_dim, rng);
  bilinear_ = &store_.add("bilinear", h2, config.outer_dim, rng);
  out_ = nn::Linear(store_, "out", h2 + config.outer_dim + h2, kEntityCount, rng);
  transitions_ = &store_.add("crf.transitions", kEntityCount, kEntityCount, rng, 0.0);
  start_ = &store_.add("crf.start", 1, kEntityCount, rng, 0.0);
  end_ = &store_.add("crf.end", 1, kEntityCount, rng, 0.0);
}

Mat Tagger::inputs(const InjectionInputs& in) const {
  const auto& toks = in.raw.tokens();
  const TokenCues cues = token_cues(in);
  const Eigen::Index d = table_->dimension();
  Mat x(static_cast<Eigen::Index>(toks.size()), d + kCueCount);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    x.row(r).head(d) = table_->lookup(toks[i]).transpose();
    x(r, d) = cues.capitalized[i];
    x(r, d + 1) = cues.sentence_initial[i];
    x(r, d + 2) = cues.query_match[i];
  }
  return x;
}

Var Tagger::emissions(Tape& tape, const InjectionInputs& in) const {
  require(!in.raw.tokens().empty(), "tagger: empty paragraph");
  Var h = encoder_(tape, tape.constant(inputs(in)));  // T x 2h

  std::vector<std::string> outer = corpus::tokenize(in.promo);
  for (auto& t : corpus::tokenize(in.query)) outer.push_back(std::move(t));
  Var u = tanh(outer_proj_(tape, tape.constant(table_->matrix(outer))));  // m x o
  Var att = softmax_rows(matmul(matmul(h, tape.param(*bilinear_)), transpose(u)));
  Var outer_read = matmul(att, u);  // T x o

  const double scale = 1.0 / std::sqrt(static_cast<double>(h.cols()));
  Var self = softmax_rows(nn::scale(matmul(h, transpose(h)), scale));
  Var context = matmul(self, h);  // T x 2h

  return out_(tape, nn::concat_cols({h, outer_read, context}));
}

Var Tagger::loss(Tape& tape, const InjectionInputs& in, const TagSequence& gold) const {
  require(gold.size() == in.raw.tokens().size(), "tagger: label count mismatch");
  const auto ints = as_ints(gold);
  return nn::crf_nll(emissions(tape, in), tape.param(*transitions_), tape.param(*start_), tape.param(*end_), ints);
}

TagSequence Tagger::tag(const InjectionInputs& in) const {
  Tape tape;
  Var e = emissions(tape, in);
  TagSequence out;
  for (int l : nn::crf_viterbi(e.value(), transitions_->value, start_->value, end_->value)) {
    out.push_back(static_cast<RevisionEntity>(l));
  }
  return out;
}

Mat Tagger::marginals(const InjectionInputs& in) const {
  Tape tape;
  Var e = emissions(tape, in);
  return nn::crf_posteriors(e.value(), transitions_->value, start_->value, end_->value).unary;
}

void Tagger::save(std::ostream& os) const {
  nlohmann::ordered_json cfg = {{"hidden", config_.hidden},
                                {"outer_dim", config_.outer_dim},
                                {"word_dim", table_->dimension()},
                                {"learning_rate", config_.learning_rate},
                                {"epochs", config_.epochs},
                                {"seed", config_.seed}};
  store_.save(os, "tagger", cfg.dump());
}

Tagger Tagger::load(std::istream& is, const embed::WordVectorTable& table) {
  const auto cfg = nlohmann::json::parse(nn::ParameterStore::read_config(is, "tagger"));
  if (cfg.at("word_dim").get<int>() != table.dimension()) throw ParseError("tagger: word dimension mismatch");
  TaggerConfig c;
  c.hidden = cfg.at("hidden");
  c.outer_dim = cfg.at("outer_dim");
  c.learning_rate = cfg.at("learning_rate");
  c.epochs = cfg.at("epochs");
  c.seed = cfg.at("seed");
  Tagger t(table, c);
  t.store_.load_tensors(is);
  return t;
}

Tagger train_tagger(const std::vector<LabeledParagraph>& data, const embed::WordVectorTable& table,
                    const TaggerConfig& config) {
  if (data.size() < 50) throw TrainingError("train_tagger: need at least 50 labeled paragraphs");
  bool seen[kEntityCount] = {false, false, false};
  for (const auto& [in, tags] : data) {
    for (auto t : tags) seen[static_cast<int>(t)] = true;
  }
  for (bool s : seen) {
    if (!s) throw TrainingError("train_tagger: every revision-entity label must occur");
  }
  Tagger model(table, config);
  nn::Adam opt(config.learning_rate);
  Rng rng(config.seed ^ 0x7A66ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (auto i : order) {
      Tape tape;
      Var l = model.loss(tape, data[i].first, data[i].second);
      if (!std::isfinite(l.scalar())) throw NumericError("train_tagger: non-finite loss");
      tape.backward(l);
      opt.step(model.store());
    }
  }
  return model;
}

TagScores score_tags(const std::vector<TagSequence>& predicted, const std::vector<TagSequence>& gold) {
  require(predicted.size() == gold.size(), "score_tags: size mismatch");
  double tp = 0, pred_pos = 0, gold_pos = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    require(predicted[i].size() == gold[i].size(), "score_tags: sequence length mismatch");
    for (std::size_t k = 0; k < gold[i].size(); ++k) {
      const bool p = predicted[i][k] != RevisionEntity::kUnsuitability;
      const bool g = gold[i][k] != RevisionEntity::kUnsuitability;
      pred_pos += p;
      gold_pos += g;
      tp += p && predicted[i][k] == gold[i][k];
    }
  }
  TagScores s;
  s.precision = pred_pos > 0 ? tp / pred_pos : 0.0;
  s.recall = gold_pos > 0 ? tp / gold_pos : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

TagScores evaluate_tagger(const Tagger& model, const std::vector<LabeledParagraph>& data) {
  std::vector<TagSequence> pred, gold;
  for (const auto& [in, tags] : data) {
    pred.push_back(model.tag(in));
    gold.push_back(tags);
  }
  return score_tags(pred, gold);
}

}  // namespace wikiseo::injection
