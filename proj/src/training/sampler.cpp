// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/training/sampler.hpp"

#include "sambamixer/error.hpp"

namespace sambamixer::training {

std::vector<CycleRef> cycle_pool(const std::vector<dataset::Battery>& batteries) {
  std::vector<CycleRef> pool;
  for (std::size_t b = 0; b < batteries.size(); ++b)
    for (std::size_t c = 0; c < batteries[b].cycles.size(); ++c) pool.push_back({b, c});
  return pool;
}

std::vector<BatchDraw> draw_batch(const std::vector<CycleRef>& pool, int batch_size, std::mt19937_64& rng) {
  if (pool.empty()) throw ParameterError("draw_batch: empty training pool");
  if (batch_size < 1) throw ParameterError("draw_batch: batch size must be positive");
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<BatchDraw> out(static_cast<std::size_t>(batch_size));
  for (BatchDraw& d : out) {
    d.ref = pool[pick(rng)];
    d.seed = rng();
  }
  return out;
}

dataset::ResampledCycle materialize(const std::vector<dataset::Battery>& batteries, const BatchDraw& draw,
                                    int num_samples, dataset::ResampleMode mode, std::mt19937_64& element_rng) {
  const dataset::PreparedCycle& c = batteries.at(draw.ref.battery).cycles.at(draw.ref.cycle);
  const auto times = dataset::resample(mode, c.cycle.time, num_samples, element_rng);
  return dataset::interpolate_cycle(c, times);
}

std::vector<dataset::ResampledCycle> sample_batch(const std::vector<dataset::Battery>& batteries, int batch_size,
                                                  int num_samples, std::mt19937_64& rng, dataset::ResampleMode mode) {
  const auto draws = draw_batch(cycle_pool(batteries), batch_size, rng);
  std::vector<dataset::ResampledCycle> out;
  out.reserve(draws.size());
  for (const BatchDraw& d : draws) {
    std::mt19937_64 element_rng(d.seed);
    out.push_back(materialize(batteries, d, num_samples, mode, element_rng));
  }
  return out;
}

}  // namespace sambamixer::training
