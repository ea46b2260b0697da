#pragma once

#include "wikiseo/nn/ops.hpp"

namespace wikiseo::adversary {

/// -Score.
nn::Var rank_loss(nn::Var score);
/// log d_True - log d_False from a 1 x 2 probability row, both clamped to [1e-7, 1 - 1e-7].
nn::Var detect_loss(nn::Var probabilities);
double detect_loss(double d_true, double d_false);
/// -cos(p, topic).
nn::Var topic_loss(nn::Var p, nn::Var topic);
/// -(cos(p, before) + cos(p, after)) / 2.
nn::Var consistency_loss(nn::Var p, nn::Var before, nn::Var after);

}  // namespace wikiseo::adversary
