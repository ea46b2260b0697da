#include "wikiseo/nn/layers.hpp"

#include <cmath>

#include "wikiseo/common/error.hpp"

namespace wikiseo::nn {

Linear::Linear(ParameterStore& store, const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng)
    : w(&store.add(name + ".w", in, out, rng)), b(&store.add(name + ".b", 1, out, rng, 0.0)) {}

Var Linear::operator()(Tape& tape, Var x) const {
  return add_bias(matmul(x, tape.param(*w)), tape.param(*b));
}

Mlp::Mlp(ParameterStore& store, const std::string& name, const std::vector<Eigen::Index>& sizes, Rng& rng,
         Activation last_act)
    : last(last_act) {
  require(sizes.size() >= 2, "Mlp: need at least input and output sizes");
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    layers.emplace_back(store, name + "." + std::to_string(i), sizes[i], sizes[i + 1], rng);
  }
}

Var Mlp::operator()(Tape& tape, Var x) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = layers[i](tape, x);
    if (i + 1 < layers.size()) {
      x = tanh(x);
    } else if (last == Activation::kTanh) {
      x = tanh(x);
    } else if (last == Activation::kSigmoid) {
      x = sigmoid(x);
    }
  }
  return x;
}

Lstm::Lstm(ParameterStore& store, const std::string& name, Eigen::Index in, Eigen::Index hidden, Rng& rng)
    : wx(&store.add(name + ".wx", in, 4 * hidden, rng)),
      wh(&store.add(name + ".wh", hidden, 4 * hidden, rng)),
      b(&store.add(name + ".b", 1, 4 * hidden, rng, 0.0)) {
  // Forget-gate bias starts at 1.
  b->value.block(0, hidden, 1, hidden).setOnes();
}

Var Lstm::operator()(Tape& tape, Var x, bool reverse) const {
  return lstm(x, tape.param(*wx), tape.param(*wh), tape.param(*b), reverse);
}

BiLstm::BiLstm(ParameterStore& store, const std::string& name, Eigen::Index in, Eigen::Index hidden, Rng& rng)
    : fwd(store, name + ".fwd", in, hidden, rng), bwd(store, name + ".bwd", in, hidden, rng) {}

Var BiLstm::operator()(Tape& tape, Var x) const {
  return concat_cols({fwd(tape, x, false), bwd(tape, x, true)});
}

void Adam::step(ParameterStore& store) {
  const auto& params = store.all();
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    }
  }
  require(m_.size() == params.size(), "Adam: parameter set changed");
  double norm2 = 0.0;
  for (const auto& p : params) {
    if (p->grad.size() == p->value.size()) norm2 += p->grad.squaredNorm();
  }
  const double norm = std::sqrt(norm2);
  const double factor = (clip_ > 0.0 && norm > clip_) ? clip_ / norm : 1.0;
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    if (p.grad.size() != p.value.size()) continue;
    Mat g = p.grad * factor;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseAbs2();
    p.value.array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
    p.grad.setZero();
  }
}

}  // namespace wikiseo::nn
