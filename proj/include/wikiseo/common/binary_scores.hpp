#pragma once

#include <cstddef>
#include <vector>

#include "wikiseo/common/error.hpp"

namespace wikiseo {

struct BinaryScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;
};

/// Positive class is `true`; empty denominators give 0.
inline BinaryScores binary_scores(const std::vector<bool>& predicted, const std::vector<bool>& actual) {
  require(predicted.size() == actual.size(), "binary_scores: size mismatch");
  double tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    tp += predicted[i] && actual[i];
    fp += predicted[i] && !actual[i];
    fn += !predicted[i] && actual[i];
    correct += predicted[i] == actual[i];
  }
  BinaryScores s;
  s.n = predicted.size();
  s.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  s.accuracy = s.n ? correct / static_cast<double>(s.n) : 0.0;
  return s;
}

}  // namespace wikiseo
