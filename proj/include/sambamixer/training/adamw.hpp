// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "sambamixer/numerics/parameter.hpp"

namespace sambamixer::training {

using numerics::ParameterSet;
using numerics::Real;
using numerics::Tensor;

struct AdamWConfig {
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
  double weight_decay{5e-2};
};

// Moments mirror the parameter shapes, in ParameterSet order.
struct AdamWState {
  std::int64_t step{0};
  std::vector<Tensor> first;
  std::vector<Tensor> second;
};

AdamWState make_adamw_state(const ParameterSet& params);

// Decoupled decay p <- p - lr*wd*p, then the bias-corrected Adam update
// p <- p - lr * m_hat / (sqrt(v_hat) + eps). Throws NumericError naming the first
// parameter with a non-finite gradient, before touching any state.
void adamw_step(ParameterSet& params, const std::vector<Tensor>& grads, AdamWState& state,
                const AdamWConfig& config, double lr);

// Scales grads in place so their global L2 norm is at most max_norm; returns the norm
// before scaling. max_norm <= 0 only measures.
double clip_grad_norm(std::vector<Tensor>& grads, double max_norm);

}  // namespace sambamixer::training
