// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/dataset/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sambamixer/dataset/splits.hpp"
#include "sambamixer/error.hpp"

namespace sambamixer::dataset {
namespace {

// Open-circuit-like curve over depth of discharge in [0, 1], ageing lowers the plateau.
double terminal_voltage(double depth, double wear, double cutoff) {
  const double plateau = 4.15 - 0.45 * depth - 0.12 * wear;
  const double knee = (plateau - cutoff) * std::pow(depth, 10.0);
  return plateau - knee;
}

}  // namespace

std::vector<DischargeCycle> synthesize_battery(const std::string& battery_id, const SyntheticOptions& o,
                                               std::uint64_t seed) {
  if (o.num_cycles < 1 || !(o.initial_capacity_ah > 0) || !(o.discharge_current_a > 0) ||
      !(o.sample_period_s > 0))
    throw ParameterError("synthesize_battery: invalid options");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double fade_per_cycle = (100.0 - o.end_of_run_soh) / std::max(1, o.num_cycles - 1);
  double start = 1.2e9 + static_cast<double>(seed % 1000) * 86400.0;
  double recovery = 0;

  std::vector<DischargeCycle> cycles;
  cycles.reserve(static_cast<std::size_t>(o.num_cycles));
  for (int k = 0; k < o.num_cycles; ++k) {
    bool rested = o.rest_every > 0 && k > 0 && k % o.rest_every == 0;
    if (k > 0) start += 3600.0 * (rested ? o.rest_hours : o.hours_between_cycles * (0.8 + 0.4 * unit(rng)));
    if (rested) recovery = o.rest_recovery_soh;

    const double soh = std::clamp(100.0 - fade_per_cycle * k + recovery + 0.15 * gauss(rng), 5.0, 102.0);
    recovery *= 0.7;
    const double capacity = o.initial_capacity_ah * soh / 100.0;
    const double wear = 1.0 - soh / 100.0;
    const double duration = capacity / o.discharge_current_a * 3600.0;

    DischargeCycle c;
    c.battery_id = battery_id;
    c.cycle_index = k;
    c.start_time = std::round(start);
    double t = 0;
    while (true) {
      const double depth = std::min(1.0, t / duration);
      c.time.push_back(static_cast<Real>(t));
      c.current.push_back(static_cast<Real>(-o.discharge_current_a * (1.0 + o.noise * gauss(rng))));
      c.voltage.push_back(
          static_cast<Real>(terminal_voltage(depth, wear, o.cutoff_voltage_v) + o.noise * gauss(rng)));
      c.temperature.push_back(
          static_cast<Real>(o.ambient_c + (8.0 + 6.0 * wear) * std::pow(depth, 1.5) + 10 * o.noise * gauss(rng)));
      if (depth >= 1.0) break;
      t = std::min(duration, t + o.sample_period_s * (0.9 + 0.2 * unit(rng)));
    }
    const double last_temp = c.temperature.back();
    for (int r = 0; r < o.trailing_rest_samples; ++r) {
      t += o.sample_period_s;
      c.time.push_back(static_cast<Real>(t));
      c.current.push_back(static_cast<Real>(0.002 * gauss(rng)));
      c.voltage.push_back(static_cast<Real>(o.cutoff_voltage_v + 0.5 * (1.0 - std::exp(-(r + 1) / 2.0))));
      c.temperature.push_back(static_cast<Real>(last_temp - 0.2 * (r + 1)));
    }
    c.capacity_ah = static_cast<Real>(capacity);
    if (k > 1 && unit(rng) < o.fault_probability) {
      // Broken measurement run: either a near-zero capacity or an implausible dip.
      c.capacity_ah = static_cast<Real>(unit(rng) < 0.5 ? 0.01 + 0.05 * unit(rng) : capacity * 0.75);
    }
    cycles.push_back(std::move(c));
  }
  return cycles;
}

std::vector<DischargeCycle> synthesize_batteries(const std::vector<int>& numbers, const SyntheticOptions& options,
                                                 std::uint64_t seed) {
  std::vector<DischargeCycle> all;
  for (int n : numbers) {
    SyntheticOptions o = options;
    // Spread the cells a little so batteries differ.
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(n));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    o.initial_capacity_ah = static_cast<Real>(options.initial_capacity_ah * (0.95 + 0.1 * unit(rng)));
    o.end_of_run_soh = static_cast<Real>(options.end_of_run_soh + 10.0 * (unit(rng) - 0.5));
    auto cycles = synthesize_battery(battery_name(n), o, seed + static_cast<std::uint64_t>(n));
    all.insert(all.end(), std::make_move_iterator(cycles.begin()), std::make_move_iterator(cycles.end()));
  }
  return all;
}

}  // namespace sambamixer::dataset
