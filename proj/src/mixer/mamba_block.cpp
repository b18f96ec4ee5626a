// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/mixer/mamba_block.hpp"

#include <cmath>

#include "sambamixer/error.hpp"
#include "sambamixer/numerics/ops.hpp"

namespace sambamixer::mixer {

namespace ops = numerics;
using numerics::Shape;
using numerics::Tensor;

namespace {

Tensor uniform(Shape shape, Real bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<Real> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

}  // namespace

MambaBlock::MambaBlock(ParameterSet& params, const std::string& prefix, const MambaConfig& config, BlockKind kind,
                       std::mt19937_64& rng)
    : config_(config), kind_(kind) {
  if (config_.d_model == 0 || config_.expansion_factor == 0 || config_.conv_width == 0) {
    throw ParameterError("Mamba block needs positive d_model, expansion factor and conv width");
  }
  const std::size_t model = config_.d_model, inner = config_.d_inner();
  norm_weight_ = &params.add(prefix + ".norm.weight", Tensor::ones({model}));
  in_proj_ = &params.add(prefix + ".in_proj.weight",
                         uniform({model, 2 * inner}, Real{1} / std::sqrt(static_cast<Real>(model)), rng));

  auto add_branch = [&](ScanDirection direction, const std::string& name) {
    Branch b;
    b.direction = direction;
    const Real conv_bound = Real{1} / std::sqrt(static_cast<Real>(config_.conv_width));
    b.conv_weight = &params.add(prefix + "." + name + ".conv.weight", uniform({inner, config_.conv_width}, conv_bound, rng));
    b.conv_bias = &params.add(prefix + "." + name + ".conv.bias", uniform({inner}, conv_bound, rng));
    ssm::SelectiveSsmConfig sc;
    sc.d_inner = inner;
    sc.d_state = config_.d_state;
    sc.dt_rank = config_.dt_rank();
    b.ssm = ssm::SelectiveSsmLayer(params, prefix + "." + name + ".ssm", sc, rng);
    branches_.push_back(std::move(b));
  };
  switch (kind_) {
    case BlockKind::kForward: add_branch(ScanDirection::kForward, "fwd"); break;
    case BlockKind::kBackward: add_branch(ScanDirection::kBackward, "bwd"); break;
    case BlockKind::kBidirectional:
      add_branch(ScanDirection::kForward, "fwd");
      add_branch(ScanDirection::kBackward, "bwd");
      break;
  }

  out_proj_ = &params.add(prefix + ".out_proj.weight",
                          uniform({inner, model}, Real{1} / std::sqrt(static_cast<Real>(inner)), rng));
  out_bias_ = &params.add(prefix + ".out_proj.bias", Tensor::zeros({model}));
}

Var MambaBlock::branch_forward(Tape& tape, const Branch& branch, Var stream) const {
  const Var w = tape.param(*branch.conv_weight);
  const Var b = tape.param(*branch.conv_bias);
  Var u;
  if (branch.direction == ScanDirection::kForward) {
    u = ops::silu(ops::causal_depthwise_conv(stream, w, b));
  } else {
    // Anti-causal conv: run the causal kernel on the time-reversed stream.
    u = ops::reverse_rows(ops::silu(ops::causal_depthwise_conv(ops::reverse_rows(stream), w, b)));
  }
  return branch.ssm.forward(tape, u, branch.direction);
}

Var MambaBlock::forward(Tape& tape, Var x) const {
  if (x.value().rank() != 2 || x.value().dim(1) != config_.d_model) {
    throw DimensionError("Mamba block expects [L x " + std::to_string(config_.d_model) + "], got " +
                         numerics::shape_string(x.shape()));
  }
  const std::size_t inner = config_.d_inner();
  const Var normed = ops::rms_norm(x, tape.param(*norm_weight_));
  const Var projected = ops::matmul(normed, tape.param(*in_proj_));
  const Var stream = ops::slice_cols(projected, 0, inner);
  const Var gate = ops::slice_cols(projected, inner, 2 * inner);

  Var scanned = branch_forward(tape, branches_.front(), stream);
  for (std::size_t i = 1; i < branches_.size(); ++i) {
    scanned = ops::add(scanned, branch_forward(tape, branches_[i], stream));
  }
  const Var gated = ops::mul(scanned, ops::silu(gate));
  const Var out = ops::linear(gated, tape.param(*out_proj_), tape.param(*out_bias_));
  return ops::add(x, out);
}

}  // namespace sambamixer::mixer
