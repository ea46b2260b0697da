#pragma once

#include <vector>

#include "wikiseo/nn/tape.hpp"

namespace wikiseo::nn {

struct CrfPosteriors {
  double log_partition = 0.0;
  Mat unary;     // T x L marginals, rows sum to 1
  Mat pairwise;  // L x L expected transition counts summed over positions
};

/// Forward-backward in log space for a linear-chain CRF.
CrfPosteriors crf_posteriors(const Mat& emissions, const Mat& transitions, const Mat& start, const Mat& end);

/// Highest-scoring label path; ties resolved toward the lower label index.
std::vector<int> crf_viterbi(const Mat& emissions, const Mat& transitions, const Mat& start, const Mat& end);

}  // namespace wikiseo::nn
