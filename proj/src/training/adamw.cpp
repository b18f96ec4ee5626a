// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/training/adamw.hpp"

#include <cmath>
#include <string>

#include "sambamixer/error.hpp"

namespace sambamixer::training {

AdamWState make_adamw_state(const ParameterSet& params) {
  AdamWState s;
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.first.push_back(Tensor::zeros(params[i].value.shape()));
    s.second.push_back(Tensor::zeros(params[i].value.shape()));
  }
  return s;
}

void adamw_step(ParameterSet& params, const std::vector<Tensor>& grads, AdamWState& state, const AdamWConfig& cfg,
                double lr) {
  if (grads.size() != params.size() || state.first.size() != params.size() || state.second.size() != params.size())
    throw DimensionError("adamw_step: gradient/state count does not match the parameter set");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!numerics::same_shape(grads[i], params[i].value) || !numerics::same_shape(state.first[i], params[i].value))
      throw DimensionError("adamw_step: shape mismatch for '" + params[i].name + "'");
    if (!grads[i].all_finite()) throw NumericError("adamw_step: non-finite gradient in '" + params[i].name + "'");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].value.data();
    auto g = grads[i].data();
    auto m = state.first[i].data();
    auto v = state.second[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      double value = p[k];
      value -= lr * cfg.weight_decay * value;
      const double mk = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      const double vk = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * static_cast<double>(g[k]) * g[k];
      m[k] = static_cast<Real>(mk);
      v[k] = static_cast<Real>(vk);
      value -= lr * (mk / correction1) / (std::sqrt(vk / correction2) + cfg.eps);
      p[k] = static_cast<Real>(value);
    }
  }
}

double clip_grad_norm(std::vector<Tensor>& grads, double max_norm) {
  long double sq = 0;
  for (const Tensor& g : grads)
    for (Real v : g.data()) sq += static_cast<long double>(v) * v;
  const double norm = static_cast<double>(std::sqrt(sq));
  if (max_norm > 0 && norm > max_norm) {
    const Real factor = static_cast<Real>(max_norm / norm);
    for (Tensor& g : grads)
      for (Real& v : g.data()) v *= factor;
  }
  return norm;
}

}  // namespace sambamixer::training
