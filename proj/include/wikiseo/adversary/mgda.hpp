#pragma once

#include <vector>

#include <Eigen/Dense>

namespace wikiseo::adversary {

struct MgdaResult {
  Eigen::VectorXd weights;  // on the simplex
  double objective = 0.0;   // squared norm of the weighted gradient sum
  int iterations = 0;
};

/// Min-norm point of the convex hull of the task gradients by Frank-Wolfe
/// with away steps, starting from uniform weights. Stops when the duality
/// gap drops below `tolerance`. Throws NumericError on non-finite input and
/// ContractError unless 2-4 equally sized gradients are given.
MgdaResult mgda_weights(const std::vector<Eigen::VectorXd>& gradients, int max_iterations = 250,
                        double tolerance = 1e-6);

}  // namespace wikiseo::adversary
