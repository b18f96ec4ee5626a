// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <random>
#include <string>

#include "sambamixer/numerics/autodiff.hpp"
#include "sambamixer/numerics/parameter.hpp"

namespace sambamixer::ssm {

using numerics::Parameter;
using numerics::ParameterSet;
using numerics::Real;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

enum class ScanDirection { kForward, kBackward };

// Fused selective scan over u[L x E] with per-token step sizes.
//   delta: [L x E], a: [E x N] (continuous, negative), b, c: [L x N], d: [E]
//   h_t[e, :] = exp(delta[t, e] a[e, :]) h_{t-1}[e, :] + delta[t, e] b[t, :] u[t, e]
//   y[t, e]   = c[t, :] . h_t[e, :] + d[e] u[t, e]
// kBackward runs the recurrence from t = L-1 down to 0.
// Throws NumericError naming the first token whose output is not finite.
Var selective_scan(Var u, Var delta, Var a, Var b, Var c, Var d, ScanDirection direction);

struct SelectiveSsmConfig {
  std::size_t d_inner{0};
  std::size_t d_state{16};
  std::size_t dt_rank{0};  // 0 selects ceil(d_inner / 32), i.e. ceil(d_model / 16) at expansion 2
  Real dt_min{Real{1e-3}};
  Real dt_max{Real{1e-1}};
};

// Input-dependent SSM layer: B_t = u_t W_B, C_t = u_t W_C,
// delta_t = softplus((u_t W_down) W_up + delta_bias), A = -exp(a_log).
class SelectiveSsmLayer {
 public:
  SelectiveSsmLayer() = default;
  SelectiveSsmLayer(ParameterSet& params, const std::string& prefix, const SelectiveSsmConfig& config,
                    std::mt19937_64& rng);

  Var forward(Tape& tape, Var u, ScanDirection direction) const;

  const SelectiveSsmConfig& config() const noexcept { return config_; }
  Parameter& w_b() const { return *w_b_; }
  Parameter& w_c() const { return *w_c_; }
  Parameter& w_delta_down() const { return *w_delta_down_; }
  Parameter& w_delta_up() const { return *w_delta_up_; }
  Parameter& delta_bias() const { return *delta_bias_; }
  Parameter& a_log() const { return *a_log_; }
  Parameter& d() const { return *d_; }

 private:
  SelectiveSsmConfig config_{};
  Parameter* w_b_{nullptr};
  Parameter* w_c_{nullptr};
  Parameter* w_delta_down_{nullptr};
  Parameter* w_delta_up_{nullptr};
  Parameter* delta_bias_{nullptr};
  Parameter* a_log_{nullptr};
  Parameter* d_{nullptr};
};

}  // namespace sambamixer::ssm
