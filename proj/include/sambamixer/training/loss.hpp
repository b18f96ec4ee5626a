// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "sambamixer/numerics/autodiff.hpp"

namespace sambamixer::training {

using numerics::Real;
using numerics::Var;

// Mean of squared differences between single-element predictions and targets.
// Throws ParameterError for an empty batch or a length mismatch.
Var mse_loss(const std::vector<Var>& predictions, std::span<const Real> targets);
Real mse(std::span<const Real> predictions, std::span<const Real> targets);

}  // namespace sambamixer::training
