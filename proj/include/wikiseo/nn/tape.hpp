#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace wikiseo::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// A trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;
};

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Mat& value() const;
  const Mat& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode automatic differentiation over dense double matrices.
///
/// Nodes are appended in evaluation order, so the recording order is a valid
/// topological order and backward() is a single reverse sweep. Parameters are
/// leaves whose gradient is added into Parameter::grad at the end of a sweep.
/// backward() may be called repeatedly on different roots of the same tape.
class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  Var constant(Mat value);
  /// Leaf whose gradient is kept on the node after backward().
  Var leaf(Mat value);
  /// Parameter leaf; a plain constant while parameters are frozen.
  Var param(Parameter& p);

  void freeze_parameters(bool frozen) { frozen_ = frozen; }

  /// Records a computed node. `inputs` decide whether the node needs a
  /// gradient at all; `backward` reads grad(self) and adds into inputs.
  Var record(Mat value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Mat value, const std::vector<Var>& inputs, Backward backward);

  /// Reverse sweep from a 1x1 root. Clears all node gradients first.
  void backward(const Var& root);

  const Mat& value(int id) const { return nodes_[id].value; }
  const Mat& grad(int id) const { return nodes_[id].grad; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }

  /// Accumulates `g` into the gradient of node `id` if it participates.
  void accumulate(int id, const Mat& g);
  template <typename Expr>
  void accumulate_expr(int id, const Expr& g) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    Backward backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  std::vector<Node> nodes_;
  bool frozen_ = false;
};

inline const Mat& Var::value() const { return tape_->value(id_); }
inline const Mat& Var::grad() const { return tape_->grad(id_); }

}  // namespace wikiseo::nn
