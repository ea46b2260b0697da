#include "wikiseo/nn/tape.hpp"

#include "wikiseo/common/error.hpp"

namespace wikiseo::nn {

Var Tape::constant(Mat value) {
  nodes_.push_back(Node{std::move(value), Mat(), nullptr, nullptr, false});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::leaf(Mat value) {
  nodes_.push_back(Node{std::move(value), Mat(), nullptr, nullptr, true});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(Parameter& p) {
  if (frozen_) return constant(p.value);
  nodes_.push_back(Node{p.value, Mat(), nullptr, &p, true});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Mat value, std::initializer_list<Var> inputs, Backward backward) {
  bool needs = false;
  for (const Var& v : inputs) needs = needs || nodes_[v.id()].needs_grad;
  nodes_.push_back(Node{std::move(value), Mat(), needs ? std::move(backward) : nullptr, nullptr, needs});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Mat value, const std::vector<Var>& inputs, Backward backward) {
  bool needs = false;
  for (const Var& v : inputs) needs = needs || nodes_[v.id()].needs_grad;
  nodes_.push_back(Node{std::move(value), Mat(), needs ? std::move(backward) : nullptr, nullptr, needs});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int id, const Mat& g) { accumulate_expr(id, g); }

void Tape::backward(const Var& root) {
  require(root.tape() == this, "backward: root belongs to another tape");
  require(root.rows() == 1 && root.cols() == 1, "backward: root must be a scalar");
  for (Node& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[root.id()].needs_grad) return;
  nodes_[root.id()].grad = Mat::Ones(1, 1);
  for (int id = root.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.param != nullptr) {
      if (n.param->grad.size() == 0) n.param->grad = Mat::Zero(n.value.rows(), n.value.cols());
      n.param->grad += n.grad;
    } else if (n.backward) {
      n.backward(*this, id);
    }
  }
}

}  // namespace wikiseo::nn
