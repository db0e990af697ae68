#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <string>
#include <utility>

#include "itl/diffcore/tensor.hpp"

namespace itl::ad {

class Tape;

/// Handle to a node recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so every
/// operation's inputs precede it and a single reverse sweep visits each node
/// once. Node storage is a deque: references to values stay valid while more
/// operations are recorded.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = true) {
    nodes_.push_back(Node{std::move(value), {}, requires_grad, false, {}, "leaf"});
    return Var(this, nodes_.size() - 1);
  }
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  /// Appends an operation. The backward function is dropped when no input
  /// requires a gradient.
  Var record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
    bool needs = false;
    for (const Var& in : inputs) {
      check_owned(in, op);
      needs = needs || nodes_[in.id()].requires_grad;
    }
    nodes_.push_back(Node{std::move(value), {}, needs, false, needs ? std::move(backward) : BackwardFn{}, op});
    return Var(this, nodes_.size() - 1);
  }

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const char* op_name(Var v) const { return nodes_[v.id()].op; }

  /// Gradient accumulator for node `id`, zero-initialised on first access.
  Tensor& grad_buffer(std::size_t id) {
    Node& n = nodes_[id];
    if (!n.has_grad) {
      n.grad = Tensor(n.value.rows(), n.value.cols());
      n.has_grad = true;
    }
    return n.grad;
  }

  void backward(Var loss) {
    if (loss.tape() != this) throw invalid_input("backward: loss node is detached from this tape");
    const Node& l = nodes_[loss.id()];
    if (l.value.rows() != 1 || l.value.cols() != 1) {
      throw invalid_input("backward: loss must be a 1x1 tensor, got " + l.value.shape_string());
    }
    if (!l.requires_grad) throw invalid_input("backward: loss does not depend on any trainable leaf");
    grad_buffer(loss.id())(0, 0) = 1.0;
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.has_grad || !n.backward) continue;
      n.backward(*this, n.grad);
    }
  }

  /// Gradient of the last backward() with respect to `v`; zeros if none flowed.
  Tensor grad(Var v) const {
    const Node& n = nodes_[v.id()];
    if (n.has_grad) return n.grad;
    return Tensor(n.value.rows(), n.value.cols());
  }

  void check_owned(Var v, const char* op) const {
    if (v.tape() != this || v.id() >= nodes_.size()) {
      throw invalid_input(std::string(op) + ": input node is detached from this tape");
    }
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
    const char* op = "";
  };

  std::deque<Node> nodes_;
};

inline const Tensor& Var::value() const {
  if (tape_ == nullptr) throw invalid_input("value(): uninitialised variable");
  return tape_->value(id_);
}

}  // namespace itl::ad
