// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/numerics/autodiff.hpp"

#include <stdexcept>

#include "sambamixer/error.hpp"

namespace sambamixer::numerics {

const Tensor& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, false, nullptr});
  return {this, nodes_.size() - 1};
}

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, true, nullptr});
  return {this, nodes_.size() - 1};
}

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return {this, it->second};
  nodes_.push_back(Node{{}, {}, {}, true, &p.value});
  Var v{this, nodes_.size() - 1};
  param_nodes_.emplace(&p, v.id());
  param_order_.push_back(&p);
  return v;
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (const Var& in : inputs) needs = needs || in.requires_grad();
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : BackwardFn{}, needs, nullptr});
  return {this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward) {
  bool needs = false;
  for (const Var& in : inputs) needs = needs || in.requires_grad();
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : BackwardFn{}, needs, nullptr});
  return {this, nodes_.size() - 1};
}

void Tape::backward(Var root) {
  if (&root.tape() != this) throw std::logic_error("backward: variable belongs to another tape");
  if (value(root.id()).size() != 1) {
    throw DimensionError("backward root must be a scalar, got shape " +
                         shape_string(value(root.id()).shape()));
  }
  for (auto& n : nodes_) n.grad = Tensor{};
  grad_buffer(root.id()).fill(Real{1});
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, n.grad);
  }
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(value(id).shape());
  return n.grad;
}

void Tape::accumulate(std::size_t id, const Tensor& grad) {
  if (!nodes_[id].requires_grad) return;
  Tensor& g = grad_buffer(id);
  if (g.size() != grad.size()) {
    throw DimensionError("gradient shape " + shape_string(grad.shape()) + " does not match value shape " +
                         shape_string(g.shape()));
  }
  auto dst = g.data();
  auto src = grad.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  return n.grad.empty() ? Tensor(value(v.id()).shape()) : n.grad;
}

Tensor Tape::grad(const Parameter& p) const {
  auto it = param_nodes_.find(&p);
  if (it == param_nodes_.end()) return Tensor(p.value.shape());
  return grad(Var{const_cast<Tape*>(this), it->second});
}

std::vector<std::pair<Parameter*, std::size_t>> Tape::parameter_nodes() const {
  std::vector<std::pair<Parameter*, std::size_t>> out;
  out.reserve(param_order_.size());
  for (Parameter* p : param_order_) out.emplace_back(p, param_nodes_.at(p));
  return out;
}

}  // namespace sambamixer::numerics
