// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sambamixer/numerics/parameter.hpp"
#include "sambamixer/numerics/tensor.hpp"

namespace sambamixer::numerics {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t id() const noexcept { return id_; }
  Tape& tape() const { return *tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }
  bool requires_grad() const;

 private:
  Tape* tape_{nullptr};
  std::size_t id_{0};
};

// Dynamic reverse-mode tape. Nodes are appended in evaluation order, so a reverse sweep
// over the node list is a valid topological order for the backward pass. A tape is
// confined to one thread.
class Tape {
 public:
  // Receives the gradient of the loss w.r.t. this node's output.
  using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  // Leaf bound to a parameter; repeated calls on one tape return the same node.
  Var param(Parameter& p);

  // Records an op output. The backward closure is dropped when no input needs a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward);

  // Seeds d(root)/d(root) = 1 and sweeps the tape. Root must hold a single element.
  void backward(Var root);

  void accumulate(std::size_t id, const Tensor& grad);
  // Mutable gradient buffer of node `id`, zero-initialised on first access.
  Tensor& grad_buffer(std::size_t id);

  const Tensor& value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.external ? *n.external : n.value;
  }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  // Gradient of the last backward root w.r.t. `v`; zeros when unreachable.
  Tensor grad(Var v) const;
  Tensor grad(const Parameter& p) const;

  std::vector<std::pair<Parameter*, std::size_t>> parameter_nodes() const;
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad{false};
    // Parameter leaves alias the parameter tensor instead of copying it.
    const Tensor* external{nullptr};
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  std::vector<Parameter*> param_order_;
};

}  // namespace sambamixer::numerics
