#pragma once

#include <string>
#include <vector>

#include "wikiseo/nn/ops.hpp"
#include "wikiseo/nn/params.hpp"

namespace wikiseo::nn {

struct Linear {
  Parameter* w = nullptr;
  Parameter* b = nullptr;

  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng);
  Var operator()(Tape& tape, Var x) const;
};

enum class Activation { kNone, kTanh, kSigmoid };

/// Stack of Linear layers with tanh between them and `last` on the output.
struct Mlp {
  std::vector<Linear> layers;
  Activation last = Activation::kNone;

  Mlp() = default;
  Mlp(ParameterStore& store, const std::string& name, const std::vector<Eigen::Index>& sizes, Rng& rng,
      Activation last = Activation::kNone);
  Var operator()(Tape& tape, Var x) const;
};

struct Lstm {
  Parameter* wx = nullptr;
  Parameter* wh = nullptr;
  Parameter* b = nullptr;

  Lstm() = default;
  Lstm(ParameterStore& store, const std::string& name, Eigen::Index in, Eigen::Index hidden, Rng& rng);
  Var operator()(Tape& tape, Var x, bool reverse) const;
  Eigen::Index hidden() const { return wh->value.rows(); }
};

/// Forward and backward LSTMs with concatenated outputs (T x 2h).
struct BiLstm {
  Lstm fwd;
  Lstm bwd;

  BiLstm() = default;
  BiLstm(ParameterStore& store, const std::string& name, Eigen::Index in, Eigen::Index hidden, Rng& rng);
  Var operator()(Tape& tape, Var x) const;
  Eigen::Index output_dim() const { return 2 * fwd.hidden(); }
};

class Adam {
 public:
  explicit Adam(double lr, double clip_norm = 5.0, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), clip_(clip_norm), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  /// Applies one update from the accumulated gradients, then zeroes them.
  void step(ParameterStore& store);

 private:
  double lr_, clip_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Mat> m_, v_;
};

}  // namespace wikiseo::nn
