// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "sambamixer/numerics/tensor.hpp"

namespace sambamixer::ssm {

using numerics::Real;

// Continuous-time single-input single-output SSM with diagonal state matrix:
//   h'(t) = diag(a) h(t) + b x(t),  y(t) = c . h(t) + d x(t)
struct LtiSsm {
  std::vector<Real> a;
  std::vector<Real> b;
  std::vector<Real> c;
  Real d{0};
  Real delta{1};
  bool skip{false};
};

// Discrete counterpart: h_t = a_bar * h_{t-1} + b_bar * x_t, y_t = c . h_t (+ d x_t).
struct DiscreteSsm {
  std::vector<Real> a_bar;
  std::vector<Real> b_bar;
  std::vector<Real> c;
  Real d{0};
  bool skip{false};

  std::size_t state_size() const noexcept { return a_bar.size(); }
};

// Below this |delta * a| the ZOH input gain switches to its series expansion.
inline constexpr Real kZohSmallArgument = Real{1e-8};

// Zero-order hold: a_bar = exp(delta a), b_bar = (delta a)^-1 (a_bar - 1) delta b.
DiscreteSsm discretize_zoh(const LtiSsm& ssm);

std::vector<Real> scan_recurrent(const DiscreteSsm& ssm, std::span<const Real> x);

// K = (c.b_bar, c.a_bar b_bar, ..., c.a_bar^{L-1} b_bar).
std::vector<Real> build_kernel(const DiscreteSsm& ssm, int length);

// Causal convolution y_t = sum_{j<=t} K_j x_{t-j} (+ d x_t).
std::vector<Real> scan_convolutional(const DiscreteSsm& ssm, std::span<const Real> x);

}  // namespace sambamixer::ssm
