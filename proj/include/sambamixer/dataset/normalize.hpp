// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include "sambamixer/dataset/cycle.hpp"

namespace sambamixer::dataset {

// Per-channel statistics of I, V, T. The sample-time column is left untouched.
struct NormStats {
  std::array<Real, 3> mean{0, 0, 0};
  std::array<Real, 3> stddev{1, 1, 1};

  // Standardizes columns 0..2 of an L x 4 signal matrix in place.
  void apply(Tensor& signals) const;
  void apply(ResampledCycle& cycle) const { apply(cycle.signals); }
};

// Population mean/std over every raw sample of every training cycle. A channel with zero
// spread gets std = 1 and a warning. Throws ParameterError for an empty set.
NormStats fit_norm_stats(const std::vector<Battery>& train, std::vector<std::string>* warnings = nullptr);

}  // namespace sambamixer::dataset
