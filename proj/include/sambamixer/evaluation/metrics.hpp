// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>

#include "sambamixer/numerics/tensor.hpp"

namespace sambamixer::evaluation {

using numerics::Real;

// All three throw ParameterError for empty or unequal inputs.
Real mae(std::span<const Real> gt, std::span<const Real> pred);
Real rmse(std::span<const Real> gt, std::span<const Real> pred);
// In percent. Throws ParameterError if any ground-truth value is zero.
Real mape(std::span<const Real> gt, std::span<const Real> pred);

inline constexpr Real kDefaultEolThreshold = 70;

// First cycle after the last downward crossing of the threshold, i.e. the last j with
// soh[j] < threshold and (j == 0 or soh[j-1] >= threshold). nullopt when the series
// ends at or above the threshold (or is empty).
std::optional<int> eol_index(std::span<const Real> soh, Real threshold = kDefaultEolThreshold);

// |eol_gt - eol_pred|, a missing EOL counting as the series length.
int absolute_eol_error(std::optional<int> eol_gt, std::optional<int> eol_pred, int series_length);

}  // namespace sambamixer::evaluation
