// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sambamixer/dataset/cycle.hpp"
#include "sambamixer/dataset/resample.hpp"

namespace sambamixer::training {

struct CycleRef {
  std::size_t battery{0};
  std::size_t cycle{0};
  bool operator==(const CycleRef&) const = default;
};

// A drawn batch element: which cycle, plus the seed of its private generator, which
// drives its resampling noise and drop-path decisions.
struct BatchDraw {
  CycleRef ref;
  std::uint64_t seed{0};
};

std::vector<CycleRef> cycle_pool(const std::vector<dataset::Battery>& batteries);

// Uniform with replacement over all (battery, cycle) pairs. Throws ParameterError for an
// empty pool or batch_size < 1.
std::vector<BatchDraw> draw_batch(const std::vector<CycleRef>& pool, int batch_size, std::mt19937_64& rng);

dataset::ResampledCycle materialize(const std::vector<dataset::Battery>& batteries, const BatchDraw& draw,
                                    int num_samples, dataset::ResampleMode mode, std::mt19937_64& element_rng);

// draw_batch followed by materialize on every element, anchor resampling by default.
std::vector<dataset::ResampledCycle> sample_batch(const std::vector<dataset::Battery>& batteries, int batch_size,
                                                  int num_samples, std::mt19937_64& rng,
                                                  dataset::ResampleMode mode = dataset::ResampleMode::kAnchor);

}  // namespace sambamixer::training
