// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "sambamixer/error.hpp"

namespace sambamixer::numerics {

namespace {

double evaluate(const ScalarFunction& f) {
  Tape tape;
  const double v = static_cast<double>(f(tape).value().item());
  if (!std::isfinite(v)) throw NumericError("grad_check: function value is not finite");
  return v;
}

}  // namespace

GradCheckResult grad_check(const ScalarFunction& f, const std::vector<Parameter*>& params, double eps) {
  std::vector<Tensor> analytic;
  {
    Tape tape;
    Var out = f(tape);
    if (!std::isfinite(static_cast<double>(out.value().item()))) {
      throw NumericError("grad_check: function value is not finite");
    }
    tape.backward(out);
    for (Parameter* p : params) analytic.push_back(tape.grad(*p));
  }

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const Real saved = p.value[i];
      p.value[i] = saved + static_cast<Real>(eps);
      const double up = evaluate(f);
      p.value[i] = saved - static_cast<Real>(eps);
      const double down = evaluate(f);
      p.value[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double a = static_cast<double>(analytic[k][i]);
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(numeric));
      if (result.checked++ == 0 || err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = p.name;
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace sambamixer::numerics
