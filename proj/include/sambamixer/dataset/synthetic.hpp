// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sambamixer/dataset/cycle.hpp"

namespace sambamixer::dataset {

// Constant-current discharge traces of an ageing cell. Capacity fades linearly with
// cycle count, with partial recovery after long rests, and the discharge duration,
// voltage curve and temperature rise all follow the capacity so SOH is learnable.
struct SyntheticOptions {
  int num_cycles{120};
  Real initial_capacity_ah{Real{1.86}};
  Real end_of_run_soh{Real{68}};  // SOH at the last cycle before rest effects
  Real discharge_current_a{Real{2}};
  Real cutoff_voltage_v{Real{2.7}};
  Real ambient_c{Real{24}};
  Real sample_period_s{Real{20}};
  int trailing_rest_samples{4};  // near-zero current samples after the load disconnects
  Real hours_between_cycles{Real{6}};
  int rest_every{30};              // a long rest every N cycles, 0 disables
  Real rest_hours{Real{120}};
  Real rest_recovery_soh{Real{3}};
  Real fault_probability{Real{0.02}};  // a cycle reports a bogus capacity
  Real noise{Real{0.002}};
};

std::vector<DischargeCycle> synthesize_battery(const std::string& battery_id, const SyntheticOptions& options,
                                               std::uint64_t seed);

// One battery per number, named B%04d, seeded from seed + number.
std::vector<DischargeCycle> synthesize_batteries(const std::vector<int>& numbers, const SyntheticOptions& options,
                                                 std::uint64_t seed);

}  // namespace sambamixer::dataset
