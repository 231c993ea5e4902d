// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include "catequiv/autodiff.hpp"

#include <stdexcept>

namespace catequiv::core {

const Tensor& Var::value() const {
  if (!tape_) throw std::logic_error("Var: unbound handle");
  return tape_->value(id_);
}

Tensor Var::grad() const {
  if (!tape_) throw std::logic_error("Var: unbound handle");
  return tape_->grad(id_);
}

bool Var::requires_grad() const { return tape_ && tape_->requires_grad(id_); }

Var Tape::append(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  return append(Node{std::move(value), {}, false, {}});
}

Var Tape::variable(Tensor value) {
  return append(Node{std::move(value), {}, record_, {}});
}

Var Tape::push(Tensor value, std::initializer_list<Var> parents,
               BackwardFn backward) {
  bool needs = false;
  for (const Var& p : parents) {
    if (p.tape() != this) throw std::logic_error("push: parent from another tape");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  needs = needs && record_;
  return append(Node{std::move(value), {}, needs,
                     needs ? std::move(backward) : BackwardFn{}});
}

Var Tape::push(Tensor value, const std::vector<Var>& parents,
               BackwardFn backward) {
  bool needs = false;
  for (const Var& p : parents) {
    if (p.tape() != this) throw std::logic_error("push: parent from another tape");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  needs = needs && record_;
  return append(Node{std::move(value), {}, needs,
                     needs ? std::move(backward) : BackwardFn{}});
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.shape() != n.value.shape()) n.grad = Tensor(n.value.shape(), 0.0);
  return n.grad;
}

Tensor Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.grad.shape() != n.value.shape()) return Tensor(n.value.shape(), 0.0);
  return n.grad;
}

void Tape::backward(Var output) {
  if (output.tape() != this) throw std::logic_error("backward: foreign output");
  if (value(output.id()).size() != 1) {
    throw ShapeError("backward: output must be scalar, got " +
                     to_string(value(output.id()).shape()));
  }
  if (!record_) throw std::logic_error("backward: tape was not recording");
  grad_buffer(output.id())[0] += 1.0;
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    // The closure only writes into parents' gradient buffers, which never
    // reallocates the node vector.
    n.backward(*this, n.grad);
  }
}

}  // namespace catequiv::core
