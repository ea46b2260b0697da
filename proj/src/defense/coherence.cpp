#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "wikiseo/common/error.hpp"
#include "wikiseo/common/random.hpp"
#include "wikiseo/corpus/text.hpp"
#include "wikiseo/defense/coherence.hpp"

namespace wikiseo::defense {

using nn::Tape;
using nn::Var;

PairFeatures pair_features(const SentenceChunk& former, const SentenceChunk& latter,
                           const embed::SentenceEncoder& encoder) {
  PairFeatures f;
  const EntityGrid g = entity_grid(former, latter);
  f.grid.resize(16);
  for (int i = 0; i < 16; ++i) f.grid(i) = std::log1p(static_cast<double>(g.transitions[static_cast<std::size_t>(i)]));
  f.former = encoder.encode(corpus::tokenize(former.text())).v;
  f.latter = encoder.encode(corpus::tokenize(latter.text())).v;
  return f;
}

CoherenceModel::CoherenceModel(const CoherenceConfig& config) : config_(config) {
  Rng rng(config.seed);
  grid_ = nn::Linear(store_, "grid", 16, config.grid_hidden, rng);
  pair_ = nn::Linear(store_, "pair", 4 * config.dimension, config.pair_hidden, rng);
  head_ = nn::Mlp(store_, "head", {config.grid_hidden + config.pair_hidden, config.head_hidden, 1}, rng);
}

Var CoherenceModel::score(Tape& tape, const PairFeatures& f) const {
  require(f.grid.size() == 16, "coherence: grid features must have 16 entries");
  require(f.former.size() == config_.dimension && f.latter.size() == config_.dimension,
          "coherence: sentence vector dimension mismatch");
  const auto d = config_.dimension;
  Mat sem(1, 4 * d);
  sem << f.former.transpose(), f.latter.transpose(), f.former.cwiseProduct(f.latter).transpose(),
      (f.former - f.latter).cwiseAbs().transpose();
  Var g = nn::tanh(grid_(tape, tape.constant(f.grid.transpose())));
  Var s = nn::tanh(pair_(tape, tape.constant(sem)));
  return head_(tape, nn::concat_cols({g, s}));
}

double CoherenceModel::score(const PairFeatures& f) const {
  Tape tape;
  return score(tape, f).scalar();
}

void CoherenceModel::save(std::ostream& os) const {
  nlohmann::ordered_json cfg = {{"dimension", config_.dimension},       {"grid_hidden", config_.grid_hidden},
                                {"pair_hidden", config_.pair_hidden},   {"head_hidden", config_.head_hidden},
                                {"learning_rate", config_.learning_rate}, {"epochs", config_.epochs},
                                {"holdout", config_.holdout},           {"seed", config_.seed}};
  store_.save(os, "coherence", cfg.dump());
}

CoherenceModel CoherenceModel::load(std::istream& is) {
  const auto cfg = nlohmann::json::parse(nn::ParameterStore::read_config(is, "coherence"));
  CoherenceConfig c;
  c.dimension = cfg.at("dimension");
  c.grid_hidden = cfg.at("grid_hidden");
  c.pair_hidden = cfg.at("pair_hidden");
  c.head_hidden = cfg.at("head_hidden");
  c.learning_rate = cfg.at("learning_rate");
  c.epochs = cfg.at("epochs");
  c.holdout = cfg.at("holdout");
  c.seed = cfg.at("seed");
  CoherenceModel m(c);
  m.store_.load_tensors(is);
  return m;
}

double coherence_score(const CoherenceModel& model, const SentenceChunk& former, const SentenceChunk& latter,
                       const embed::SentenceEncoder& encoder) {
  return model.score(pair_features(former, latter, encoder));
}

double hinge_loss(double f_pos, double f_neg) { return std::max(0.0, 1.0 - f_pos + f_neg); }

Var hinge_loss(Var f_pos, Var f_neg) {
  return nn::clamp(nn::add_scalar(nn::sub(f_neg, f_pos), 1.0), 0.0, std::numeric_limits<double>::infinity());
}

namespace {

struct TripletFeatures {
  PairFeatures positive;
  PairFeatures negative;
};

TripletFeatures features_of(const CoherenceTriplet& t, const embed::SentenceEncoder& encoder) {
  if (t.anchor_first) return {pair_features(t.anchor, t.positive, encoder), pair_features(t.anchor, t.negative, encoder)};
  return {pair_features(t.positive, t.anchor, encoder), pair_features(t.negative, t.anchor, encoder)};
}

double accuracy_on(const CoherenceModel& model, const std::vector<TripletFeatures>& feats,
                   const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0;
  std::size_t ok = 0;
  for (auto i : idx) ok += model.score(feats[i].positive) > model.score(feats[i].negative);
  return static_cast<double>(ok) / static_cast<double>(idx.size());
}

}  // namespace

TripletScores score_triplet(const CoherenceModel& model, const CoherenceTriplet& t,
                            const embed::SentenceEncoder& encoder) {
  const auto f = features_of(t, encoder);
  return {model.score(f.positive), model.score(f.negative)};
}

double pairwise_accuracy(const CoherenceModel& model, const std::vector<CoherenceTriplet>& triplets,
                         const embed::SentenceEncoder& encoder) {
  require(!triplets.empty(), "pairwise_accuracy: no triplets");
  std::size_t ok = 0;
  for (const auto& t : triplets) {
    const auto s = score_triplet(model, t, encoder);
    ok += s.positive > s.negative;
  }
  return static_cast<double>(ok) / static_cast<double>(triplets.size());
}

CoherenceTraining train_coherence(const std::vector<CoherenceTriplet>& triplets, const embed::SentenceEncoder& encoder,
                                  const CoherenceConfig& config) {
  require(triplets.size() >= 500, "train_coherence: need at least 500 triplets");
  require(config.holdout >= 0.0 && config.holdout < 1.0, "train_coherence: holdout must be in [0, 1)");
  CoherenceConfig cfg = config;
  cfg.dimension = encoder.dimension();
  std::vector<TripletFeatures> feats;
  feats.reserve(triplets.size());
  for (const auto& t : triplets) feats.push_back(features_of(t, encoder));

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(triplets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  const auto n_test = static_cast<std::size_t>(cfg.holdout * static_cast<double>(order.size()));
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());

  CoherenceTraining out{CoherenceModel(cfg), 0.0, 0.0, n_test, {}};
  CoherenceModel& model = out.model;
  nn::Adam opt(cfg.learning_rate);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(train);
    double total = 0.0;
    for (auto i : train) {
      Tape tape;
      Var loss = hinge_loss(model.score(tape, feats[i].positive), model.score(tape, feats[i].negative));
      total += loss.scalar();
      if (loss.scalar() <= 0.0) continue;
      tape.backward(loss);
      opt.step(model.store());
    }
    const double mean = total / static_cast<double>(train.size());
    if (!std::isfinite(mean)) throw NumericError("train_coherence: non-finite loss");
    out.epoch_loss.push_back(mean);
  }
  out.train_accuracy = accuracy_on(model, feats, train);
  out.held_out_accuracy = accuracy_on(model, feats, test);
  return out;
}

JointVerdict detect_revision(const CoherenceModel& model, const corpus::Article& before, const corpus::Article& after,
                             const embed::SentenceEncoder& encoder, double margin) {
  const auto t = triplets_from_revision(before, after);
  JointVerdict v;
  v.upper = score_triplet(model, t[0], encoder);
  v.lower = score_triplet(model, t[1], encoder);
  v.flagged = v.upper.negative < v.upper.positive - margin || v.lower.negative < v.lower.positive - margin;
  return v;
}

std::vector<std::pair<corpus::Article, corpus::Article>> legitimate_revisions(const corpus::Corpus& corpus,
                                                                              std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < corpus.articles().size(); ++i) {
    if (corpus.articles()[i].paragraphs.size() >= 3) eligible.push_back(i);
  }
  require(!eligible.empty(), "legitimate_revisions: no article has three paragraphs");
  Rng rng(seed);
  std::vector<std::pair<corpus::Article, corpus::Article>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = corpus.articles()[rng.pick(eligible)];
    const std::size_t k = 1 + rng.index(a.paragraphs.size() - 2);
    out.emplace_back(corpus::remove_paragraph(a, k), a);
  }
  return out;
}

}  // namespace wikiseo::defense
