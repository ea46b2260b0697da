#pragma once

#include <span>
#include <vector>

#include "wikiseo/nn/tape.hpp"

namespace wikiseo::nn {

// Elementwise and linear algebra. Row vectors are 1 x n matrices; sequences
// are T x d with one row per position.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var neg(Var a);
Var matmul(Var a, Var b);
Var transpose(Var a);
/// a (r x c) + bias (1 x c) broadcast over rows.
Var add_bias(Var a, Var bias);
/// s (1 x 1) * a.
Var scale_by(Var s, Var a);

Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
Var log(Var a);
Var clamp(Var a, double lo, double hi);

Var sum(Var a);
Var mean(Var a);
/// Column means: (r x c) -> (1 x c).
Var mean_rows(Var a);
/// Column maxima: (r x c) -> (1 x c).
Var max_rows(Var a);

Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
/// Picks entries of a row vector by index: (1 x n) -> (1 x idx.size()).
Var gather(Var row, const std::vector<Eigen::Index>& idx);
/// Appends zero rows up to `rows` total.
Var pad_rows(Var a, Eigen::Index rows);

Var softmax_rows(Var a);
/// Row vector divided by its sum.
Var normalize_sum(Var a);
/// Cosine of two row vectors; defined as 0 when either is zero.
Var cosine(Var a, Var b);
/// Row-wise cosine matrix between the rows of a (m x d) and b (n x d).
Var cosine_matrix(Var a, Var b);
/// The k largest entries of the flattened matrix, descending (ties by position).
Var kmax(Var a, Eigen::Index k);
/// Mean of the k largest entries of a row vector (fewer if the row is shorter).
Var topk_mean(Var row, Eigen::Index k);
/// Weighted sum sum_i w(0,i) * xs[i]; all xs share one shape.
Var weighted_sum(Var w, const std::vector<Var>& xs);

/// Unidirectional LSTM over the rows of x. Gates ordered i,f,g,o.
/// wx: d x 4h, wh: h x 4h, b: 1 x 4h. Output rows stay aligned with input
/// rows when `reverse` is set.
Var lstm(Var x, Var wx, Var wh, Var b, bool reverse);

/// Negative log-likelihood of a label path under a linear-chain CRF.
/// emissions: T x L, transitions: L x L (from row to column), start/end: 1 x L.
Var crf_nll(Var emissions, Var transitions, Var start, Var end, std::span<const int> gold);

}  // namespace wikiseo::nn
