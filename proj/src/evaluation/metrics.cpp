// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/evaluation/metrics.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "sambamixer/error.hpp"

namespace sambamixer::evaluation {
namespace {

void check(std::span<const Real> gt, std::span<const Real> pred, const char* what) {
  if (gt.empty()) throw ParameterError(std::string(what) + ": empty series");
  if (gt.size() != pred.size())
    throw ParameterError(std::string(what) + ": length mismatch " + std::to_string(gt.size()) + " vs " +
                         std::to_string(pred.size()));
}

}  // namespace

Real mae(std::span<const Real> gt, std::span<const Real> pred) {
  check(gt, pred, "mae");
  long double acc = 0;
  for (std::size_t k = 0; k < gt.size(); ++k) acc += std::abs(gt[k] - pred[k]);
  return static_cast<Real>(acc / gt.size());
}

Real rmse(std::span<const Real> gt, std::span<const Real> pred) {
  check(gt, pred, "rmse");
  long double acc = 0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const long double d = gt[k] - pred[k];
    acc += d * d;
  }
  return static_cast<Real>(std::sqrt(acc / gt.size()));
}

Real mape(std::span<const Real> gt, std::span<const Real> pred) {
  check(gt, pred, "mape");
  long double acc = 0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (gt[k] == 0) throw ParameterError("mape: ground truth is zero at index " + std::to_string(k));
    acc += std::abs(gt[k] - pred[k]) / std::abs(gt[k]);
  }
  return static_cast<Real>(100 * acc / gt.size());
}

std::optional<int> eol_index(std::span<const Real> soh, Real threshold) {
  if (soh.empty() || soh.back() >= threshold) return std::nullopt;
  for (std::size_t j = soh.size(); j-- > 0;) {
    if (j == 0 || soh[j - 1] >= threshold) return static_cast<int>(j);
  }
  return 0;
}

int absolute_eol_error(std::optional<int> eol_gt, std::optional<int> eol_pred, int series_length) {
  return std::abs(eol_gt.value_or(series_length) - eol_pred.value_or(series_length));
}

}  // namespace sambamixer::evaluation
