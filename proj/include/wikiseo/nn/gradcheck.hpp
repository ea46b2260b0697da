#pragma once

#include <functional>

#include "wikiseo/nn/params.hpp"

namespace wikiseo::nn {

struct GradCheckResult {
  double relative_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

/// Compares backprop gradients of a scalar loss against central differences
/// over every parameter in `store`. `loss` must build its graph on the tape
/// it is given and return the scalar root.
GradCheckResult check_gradients(ParameterStore& store, const std::function<Var(Tape&)>& loss, double eps = 1e-6);

}  // namespace wikiseo::nn
