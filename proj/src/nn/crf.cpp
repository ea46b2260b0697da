#include "wikiseo/nn/crf.hpp"

#include <cmath>
#include <limits>

namespace wikiseo::nn {
namespace {

double logsumexp(const Eigen::RowVectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

CrfPosteriors crf_posteriors(const Mat& e, const Mat& trans, const Mat& start, const Mat& end) {
  const Eigen::Index steps = e.rows(), labels = e.cols();
  Mat alpha(steps, labels), beta(steps, labels);
  alpha.row(0) = start.row(0) + e.row(0);
  for (Eigen::Index t = 1; t < steps; ++t) {
    for (Eigen::Index j = 0; j < labels; ++j) {
      Eigen::RowVectorXd v = alpha.row(t - 1) + trans.col(j).transpose();
      alpha(t, j) = logsumexp(v) + e(t, j);
    }
  }
  beta.row(steps - 1) = end.row(0);
  for (Eigen::Index t = steps - 2; t >= 0; --t) {
    for (Eigen::Index i = 0; i < labels; ++i) {
      Eigen::RowVectorXd v = trans.row(i) + e.row(t + 1) + beta.row(t + 1);
      beta(t, i) = logsumexp(v);
    }
  }
  CrfPosteriors out;
  out.log_partition = logsumexp(alpha.row(steps - 1) + end.row(0));
  out.unary = (alpha + beta).array() - out.log_partition;
  out.unary = out.unary.array().exp();
  out.pairwise = Mat::Zero(labels, labels);
  for (Eigen::Index t = 1; t < steps; ++t) {
    for (Eigen::Index i = 0; i < labels; ++i) {
      for (Eigen::Index j = 0; j < labels; ++j) {
        out.pairwise(i, j) +=
            std::exp(alpha(t - 1, i) + trans(i, j) + e(t, j) + beta(t, j) - out.log_partition);
      }
    }
  }
  return out;
}

std::vector<int> crf_viterbi(const Mat& e, const Mat& trans, const Mat& start, const Mat& end) {
  const Eigen::Index steps = e.rows(), labels = e.cols();
  Mat score(steps, labels);
  Eigen::MatrixXi back(steps, labels);
  score.row(0) = start.row(0) + e.row(0);
  for (Eigen::Index t = 1; t < steps; ++t) {
    for (Eigen::Index j = 0; j < labels; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      int arg = 0;
      for (Eigen::Index i = 0; i < labels; ++i) {
        const double v = score(t - 1, i) + trans(i, j);
        if (v > best) {
          best = v;
          arg = static_cast<int>(i);
        }
      }
      score(t, j) = best + e(t, j);
      back(t, j) = arg;
    }
  }
  std::vector<int> path(static_cast<std::size_t>(steps));
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < labels; ++j) {
    const double v = score(steps - 1, j) + end(0, j);
    if (v > best) {
      best = v;
      path.back() = static_cast<int>(j);
    }
  }
  for (Eigen::Index t = steps - 1; t > 0; --t) path[t - 1] = back(t, path[t]);
  return path;
}

}  // namespace wikiseo::nn
