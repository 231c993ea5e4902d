// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.
//
// Reverse-mode differentiation over a flat tape (Wengert list). Every op in
// ops.hpp appends one node holding its forward value and, when recording, a
// closure that pushes the node's gradient into its parents.

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "catequiv/tensor.hpp"

namespace catequiv::core {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  /// Accumulated gradient; a zero tensor if nothing flowed into this node.
  Tensor grad() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  /// With record == false no closures are kept; forward-only evaluation.
  explicit Tape(bool record = true) : record_(record) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  /// Leaf that never receives gradients.
  Var constant(Tensor value);
  /// Leaf whose gradient is tracked (a parameter or a checked input).
  Var variable(Tensor value);

  /// Appends a derived node. `backward` is dropped unless some parent
  /// requires a gradient and the tape is recording.
  Var push(Tensor value, std::initializer_list<Var> parents,
           BackwardFn backward);
  Var push(Tensor value, const std::vector<Var>& parents,
           BackwardFn backward);

  /// Seeds d(output)/d(output) = 1 and replays the tape in reverse. The
  /// output must hold exactly one element.
  void backward(Var output);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of node `id`, zero-initialised on first access.
  Tensor& grad_buffer(std::size_t id);
  Tensor grad(std::size_t id) const;

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var append(Node node);

  bool record_;
  std::vector<Node> nodes_;
};

}  // namespace catequiv::core
