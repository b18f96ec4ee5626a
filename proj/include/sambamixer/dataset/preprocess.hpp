// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sambamixer/dataset/cycle.hpp"

namespace sambamixer::dataset {

struct PreprocessOptions {
  Real disconnect_current_a{Real{0.05}};  // |I| below this for the rest of the trace = load off
  Real max_soh_drop_pct{Real{10}};        // drop cycle k if SOH_k < SOH_{k-1} - this
  Real min_capacity_ah{Real{0.1}};        // measurement glitches report ~0 Ah
};

struct PreprocessReport {
  std::size_t truncated_samples{0};
  std::size_t dropped_cycles{0};
  std::vector<std::string> excluded_batteries;
  std::vector<std::string> warnings;
};

// SOH in percent: 100 * capacity / reference. Throws ParameterError for reference <= 0.
Real soh_label(Real capacity_ah, Real reference_capacity_ah);

// Removes the trailing samples recorded after the load was disconnected, i.e. from the
// first index after which |I| stays below the threshold. Returns the number removed.
std::size_t truncate_after_disconnect(DischargeCycle& cycle, Real threshold_a);

// Groups cycles per battery (input sorted by battery, start time), truncates each trace,
// drops glitch cycles and cycles whose SOH falls more than max_soh_drop_pct below the
// previous kept cycle, and attaches SOH labels (reference = first kept cycle) and the
// hours since the previous kept cycle (0 for the first). Kept cycles are re-indexed
// 0..K-1. Batteries left with fewer than 2 cycles are excluded with a warning.
std::vector<Battery> preprocess(std::vector<DischargeCycle> cycles, const PreprocessOptions& options = {},
                                PreprocessReport* report = nullptr);

}  // namespace sambamixer::dataset
