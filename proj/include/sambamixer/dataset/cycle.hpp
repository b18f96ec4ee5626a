// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sambamixer/numerics/tensor.hpp"

namespace sambamixer::dataset {

using numerics::Real;
using numerics::Tensor;

// One measured discharge cycle as stored on disk.
struct DischargeCycle {
  std::string battery_id;
  int cycle_index{0};
  double start_time{0.0};  // seconds since the Unix epoch, UTC
  std::vector<Real> current;      // A
  std::vector<Real> voltage;      // V
  std::vector<Real> temperature;  // degC
  std::vector<Real> time;         // s, time[0] == 0
  Real capacity_ah{0};

  std::size_t samples() const noexcept { return time.size(); }
};

// Throws ParameterError describing the first violated invariant
// (equal lengths >= 2, strictly increasing time, positive capacity).
void validate_cycle(const DischargeCycle& cycle);

// A cycle after preprocessing, with its labels attached.
struct PreparedCycle {
  DischargeCycle cycle;
  Real soh_pct{0};
  Real delta_t_hours{0};
};

struct Battery {
  std::string id;
  Real reference_capacity_ah{0};
  std::vector<PreparedCycle> cycles;
};

// Column layout of ResampledCycle::signals.
enum Channel : std::size_t { kCurrent = 0, kVoltage = 1, kTemperature = 2, kSampleTime = 3 };

// Fixed-length model input: signals is [L x 4] with columns I, V, T, S*.
struct ResampledCycle {
  Tensor signals;
  Real delta_t_hours{0};
  Real soh_label{0};
  std::string battery_id;
  int cycle_index{0};

  std::size_t length() const { return signals.rank() == 2 ? signals.dim(0) : 0; }
};

// ISO-8601 UTC timestamps ("2008-04-02T13:08:17Z", optional fractional seconds).
double parse_iso8601(const std::string& text);
std::string format_iso8601(double seconds_since_epoch);

}  // namespace sambamixer::dataset
