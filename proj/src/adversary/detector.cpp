#include "wikiseo/adversary/detector.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "wikiseo/common/error.hpp"
#include "wikiseo/common/random.hpp"

namespace wikiseo::adversary {

using nn::Tape;
using nn::Var;

SubstituteDetector::SubstituteDetector(const DetectorConfig& config) : config_(config) {
  Rng rng(config.seed);
  proj_ = nn::Linear(store_, "proj", config.word_dim, config.projection, rng);
  head_ = nn::Mlp(store_, "head", {4 * config.projection + 1, config.head_hidden, 2}, rng);
}

Var SubstituteDetector::probabilities(Tape& tape, Var inserted, const Mat& lead) const {
  require(inserted.rows() > 0 && lead.rows() > 0, "substitute detector: empty input");
  Var lw = tape.constant(lead);
  Var h = nn::tanh(proj_(tape, inserted));  // L x p
  Var g = nn::tanh(proj_(tape, lw));        // M x p
  const double s = 1.0 / std::sqrt(static_cast<double>(config_.projection));
  Var self = nn::matmul(nn::softmax_rows(nn::scale(nn::matmul(h, nn::transpose(h)), s)), h);
  Var cross = nn::matmul(nn::softmax_rows(nn::matmul(h, nn::transpose(g))), g);
  Var topic = nn::cosine(nn::mean_rows(inserted), nn::mean_rows(lw));
  Var features = nn::concat_cols({nn::mean_rows(self), nn::max_rows(h), nn::mean_rows(nn::mul(h, cross)),
                                  nn::mean_rows(nn::sub(h, cross)), topic});
  return nn::softmax_rows(head_(tape, features));
}

double SubstituteDetector::damaging_probability(const Mat& inserted, const Mat& lead) const {
  Tape tape;
  return probabilities(tape, tape.constant(inserted), lead).value()(0, 0);
}

void SubstituteDetector::save(std::ostream& os) const {
  nlohmann::ordered_json cfg = {{"word_dim", config_.word_dim},        {"projection", config_.projection},
                                {"head_hidden", config_.head_hidden},  {"learning_rate", config_.learning_rate},
                                {"epochs", config_.epochs},            {"seed", config_.seed}};
  store_.save(os, "substitute-detector", cfg.dump());
}

SubstituteDetector SubstituteDetector::load(std::istream& is) {
  const auto cfg = nlohmann::json::parse(nn::ParameterStore::read_config(is, "substitute-detector"));
  DetectorConfig c;
  c.word_dim = cfg.at("word_dim");
  c.projection = cfg.at("projection");
  c.head_hidden = cfg.at("head_hidden");
  c.learning_rate = cfg.at("learning_rate");
  c.epochs = cfg.at("epochs");
  c.seed = cfg.at("seed");
  SubstituteDetector d(c);
  d.store_.load_tensors(is);
  return d;
}

std::vector<DetectorExample> label_edits(const std::vector<corpus::Edit>& edits, const target::WikiApi& wiki,
                                         const embed::WordVectorTable& table) {
  std::vector<DetectorExample> out;
  out.reserve(edits.size());
  for (const auto& e : edits) {
    const std::size_t i = corpus::inserted_index(e.before, e.after);
    out.push_back({table.matrix(e.after.paragraphs[i].tokens()), table.matrix(corpus::lead_paragraph(e.before).tokens()),
                   wiki.detect(e.before, e.after).damaging});
  }
  return out;
}

SubstituteDetector train_substitute_detector(const std::vector<DetectorExample>& data, const DetectorConfig& config) {
  std::size_t positives = 0;
  for (const auto& d : data) positives += d.damaging;
  if (positives == 0 || positives == data.size()) throw TrainingError("train_substitute_detector: need both classes");
  SubstituteDetector model(config);
  nn::Adam opt(config.learning_rate);
  Rng rng(config.seed ^ 0xDE7EC7ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (auto i : order) {
      Tape tape;
      Var p = model.probabilities(tape, tape.constant(data[i].inserted), data[i].lead);
      Var loss = nn::neg(nn::log(nn::clamp(nn::slice_cols(p, data[i].damaging ? 0 : 1, 1), 1e-12, 1.0)));
      if (!std::isfinite(loss.scalar())) throw NumericError("train_substitute_detector: non-finite loss");
      tape.backward(loss);
      opt.step(model.store());
    }
  }
  return model;
}

BinaryScores evaluate_detector(const SubstituteDetector& model, const std::vector<DetectorExample>& data) {
  std::vector<bool> pred, truth;
  for (const auto& d : data) {
    pred.push_back(model.damaging_probability(d.inserted, d.lead) >= 0.5);
    truth.push_back(d.damaging);
  }
  return binary_scores(pred, truth);
}

}  // namespace wikiseo::adversary
