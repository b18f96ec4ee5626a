// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/training/loss.hpp"

#include "sambamixer/error.hpp"
#include "sambamixer/numerics/ops.hpp"

namespace sambamixer::training {
namespace {

void check(std::size_t n, std::size_t m) {
  if (n == 0) throw ParameterError("mse: empty batch");
  if (n != m) throw ParameterError("mse: " + std::to_string(n) + " predictions vs " + std::to_string(m) + " targets");
}

}  // namespace

Var mse_loss(const std::vector<Var>& predictions, std::span<const Real> targets) {
  check(predictions.size(), targets.size());
  std::vector<Var> squared;
  squared.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const Var pred = numerics::reshape(predictions[i], {1});
    squared.push_back(numerics::square(numerics::add_scalar(pred, -targets[i])));
  }
  Var total = squared.front();
  for (std::size_t i = 1; i < squared.size(); ++i) total = numerics::add(total, squared[i]);
  return numerics::scale(numerics::sum(total), Real{1} / static_cast<Real>(predictions.size()));
}

Real mse(std::span<const Real> predictions, std::span<const Real> targets) {
  check(predictions.size(), targets.size());
  long double acc = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const long double d = predictions[i] - targets[i];
    acc += d * d;
  }
  return static_cast<Real>(acc / predictions.size());
}

}  // namespace sambamixer::training
