// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sambamixer/numerics/autodiff.hpp"

namespace sambamixer::numerics {

struct GradCheckResult {
  double max_relative_error{0.0};
  std::string worst_parameter;
  std::size_t worst_index{0};
  double analytic{0.0};
  double numeric{0.0};
  std::size_t checked{0};
};

// Scalar-valued function of the parameters; it must bind them through tape.param().
using ScalarFunction = std::function<Var(Tape&)>;

// Compares reverse-mode gradients against central differences for every element of
// every listed parameter. Error per element is |analytic - numeric| / max(1, |numeric|).
// Throws NumericError when f is non-finite at any probe point.
GradCheckResult grad_check(const ScalarFunction& f, const std::vector<Parameter*>& params, double eps);

}  // namespace sambamixer::numerics
