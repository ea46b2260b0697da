#include "wikiseo/adversary/mgda.hpp"

#include <algorithm>

#include "wikiseo/common/error.hpp"

namespace wikiseo::adversary {

MgdaResult mgda_weights(const std::vector<Eigen::VectorXd>& gradients, int max_iterations, double tolerance) {
  const auto n = static_cast<Eigen::Index>(gradients.size());
  require(n >= 2 && n <= 4, "mgda_weights: need 2-4 task gradients");
  for (const auto& g : gradients) {
    require(g.size() == gradients.front().size(), "mgda_weights: gradient sizes differ");
    if (!g.allFinite()) throw NumericError("mgda_weights: non-finite gradient");
  }
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) gram(i, j) = gram(j, i) = gradients[i].dot(gradients[j]);
  }
  MgdaResult r;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (; r.iterations < max_iterations; ++r.iterations) {
    const Eigen::VectorXd mw = gram * w;
    const double wmw = w.dot(mw);
    Eigen::Index toward = 0, away = -1;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (mw(i) < mw(toward)) toward = i;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (w(i) > 0.0 && (away < 0 || mw(i) > mw(away))) away = i;
    }
    const double fw_gap = wmw - mw(toward);
    if (fw_gap < tolerance) break;
    const double away_gap = mw(away) - wmw;
    Eigen::VectorXd d;
    double step_max = 1.0;
    if (fw_gap >= away_gap) {
      d = -w;
      d(toward) += 1.0;
    } else {
      d = w;
      d(away) -= 1.0;
      step_max = w(away) / (1.0 - w(away));
    }
    // Exact line search on the quadratic w'Mw along d.
    const double curvature = d.dot(gram * d);
    const double slope = d.dot(mw);
    double step = curvature > 0.0 ? -slope / curvature : step_max;
    step = std::clamp(step, 0.0, step_max);
    if (step <= 0.0) break;
    w += step * d;
    w = w.cwiseMax(0.0);
    w /= w.sum();
  }
  r.weights = w;
  r.objective = w.dot(gram * w);
  return r;
}

}  // namespace wikiseo::adversary
