#include "wikiseo/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace wikiseo::nn {

GradCheckResult check_gradients(ParameterStore& store, const std::function<Var(Tape&)>& loss, double eps) {
  store.zero_grad();
  {
    Tape tape;
    Var root = loss(tape);
    tape.backward(root);
  }
  const Vec analytic = store.flat_grads();
  Vec x = store.flat_values();
  Vec numeric(x.size());
  auto eval = [&](const Vec& v) {
    store.set_flat_values(v);
    Tape tape;
    return loss(tape).scalar();
  };
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp(i) += eps;
    xm(i) -= eps;
    numeric(i) = (eval(xp) - eval(xm)) / (2.0 * eps);
  }
  store.set_flat_values(x);
  store.zero_grad();
  GradCheckResult r;
  r.checked = static_cast<std::size_t>(x.size());
  const double denom = std::max({analytic.norm(), numeric.norm(), 1e-12});
  r.relative_error = (analytic - numeric).norm() / denom;
  r.max_abs_error = (analytic - numeric).cwiseAbs().maxCoeff();
  return r;
}

}  // namespace wikiseo::nn
