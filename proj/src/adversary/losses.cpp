#include "wikiseo/adversary/losses.hpp"

#include <algorithm>
#include <cmath>

namespace wikiseo::adversary {

namespace {
constexpr double kLo = 1e-7;
constexpr double kHi = 1.0 - 1e-7;
}  // namespace

nn::Var rank_loss(nn::Var score) { return nn::neg(score); }

nn::Var detect_loss(nn::Var probabilities) {
  nn::Var t = nn::clamp(nn::slice_cols(probabilities, 0, 1), kLo, kHi);
  nn::Var f = nn::clamp(nn::slice_cols(probabilities, 1, 1), kLo, kHi);
  return nn::sub(nn::log(t), nn::log(f));
}

double detect_loss(double d_true, double d_false) {
  return std::log(std::clamp(d_true, kLo, kHi)) - std::log(std::clamp(d_false, kLo, kHi));
}

nn::Var topic_loss(nn::Var p, nn::Var topic) { return nn::neg(nn::cosine(p, topic)); }

nn::Var consistency_loss(nn::Var p, nn::Var before, nn::Var after) {
  return nn::scale(nn::add(nn::cosine(p, before), nn::cosine(p, after)), -0.5);
}

}  // namespace wikiseo::adversary
