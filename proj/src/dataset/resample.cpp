// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/dataset/resample.hpp"

#include <algorithm>

#include "sambamixer/error.hpp"

namespace sambamixer::dataset {
namespace {

struct Range {
  Real lo;
  Real hi;
};

Range range_of(std::span<const Real> times, int length) {
  if (length < 2) throw ParameterError("resample: L must be >= 2, got " + std::to_string(length));
  if (times.empty()) throw ParameterError("resample: empty time axis");
  const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  return {*lo, *hi};
}

}  // namespace

std::string to_string(ResampleMode mode) {
  switch (mode) {
    case ResampleMode::kLinear: return "linear";
    case ResampleMode::kRandom: return "random";
    case ResampleMode::kAnchor: return "anchor";
  }
  return "?";
}

ResampleMode parse_resample_mode(const std::string& text) {
  if (text == "linear") return ResampleMode::kLinear;
  if (text == "random") return ResampleMode::kRandom;
  if (text == "anchor") return ResampleMode::kAnchor;
  throw ConfigError("unknown resample mode '" + text + "' (expected linear, random or anchor)");
}

std::vector<Real> resample_linear(std::span<const Real> times, int length) {
  const Range r = range_of(times, length);
  std::vector<Real> out(static_cast<std::size_t>(length));
  const Real span = r.hi - r.lo;
  for (int t = 0; t < length; ++t) out[t] = r.lo + span * static_cast<Real>(t) / static_cast<Real>(length - 1);
  out.back() = r.hi;
  return out;
}

std::vector<Real> resample_random(std::span<const Real> times, int length, std::mt19937_64& rng) {
  const Range r = range_of(times, length);
  std::uniform_real_distribution<double> dist(r.lo, r.hi);
  std::vector<Real> out(static_cast<std::size_t>(length));
  for (Real& v : out) v = std::clamp(static_cast<Real>(dist(rng)), r.lo, r.hi);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Real> resample_anchor(std::span<const Real> times, int length, std::mt19937_64& rng,
                                  Real noise_fraction) {
  std::vector<Real> out = resample_linear(times, length);
  const Range r{out.front(), out.back()};
  const Real half = noise_fraction * (r.hi - r.lo) / static_cast<Real>(length - 1) / 2;
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::size_t t = 0; t < out.size(); ++t) {
    const Real z = half * static_cast<Real>(dist(rng));
    Real v = std::clamp(out[t] + z, r.lo, r.hi);
    // Neighbouring jitter windows touch; rounding must not reorder them.
    if (t > 0) v = std::max(v, out[t - 1]);
    out[t] = v;
  }
  return out;
}

std::vector<Real> resample(ResampleMode mode, std::span<const Real> times, int length, std::mt19937_64& rng) {
  switch (mode) {
    case ResampleMode::kLinear: return resample_linear(times, length);
    case ResampleMode::kRandom: return resample_random(times, length, rng);
    case ResampleMode::kAnchor: return resample_anchor(times, length, rng);
  }
  throw ConfigError("resample: bad mode");
}

std::vector<Real> interpolate(std::span<const Real> knots, std::span<const Real> values,
                              std::span<const Real> queries) {
  if (knots.size() != values.size() || knots.empty())
    throw DimensionError("interpolate: knots and values must be equal-length and nonempty");
  std::vector<Real> out(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const Real x = queries[q];
    if (x < knots.front() || x > knots.back())
      throw ParameterError("interpolate: query " + std::to_string(x) + " outside [" +
                           std::to_string(knots.front()) + ", " + std::to_string(knots.back()) + "]");
    auto it = std::upper_bound(knots.begin(), knots.end(), x);
    if (it == knots.end()) {
      out[q] = values.back();
      continue;
    }
    const std::size_t hi = static_cast<std::size_t>(it - knots.begin());
    const std::size_t lo = hi - 1;
    if (x == knots[lo]) {
      out[q] = values[lo];
      continue;
    }
    const Real w = (x - knots[lo]) / (knots[hi] - knots[lo]);
    out[q] = values[lo] + w * (values[hi] - values[lo]);
  }
  return out;
}

ResampledCycle interpolate_cycle(const PreparedCycle& prepared, std::span<const Real> sample_times) {
  const DischargeCycle& c = prepared.cycle;
  const std::vector<Real> current = interpolate(c.time, c.current, sample_times);
  const std::vector<Real> voltage = interpolate(c.time, c.voltage, sample_times);
  const std::vector<Real> temperature = interpolate(c.time, c.temperature, sample_times);

  ResampledCycle out;
  out.signals = Tensor::zeros({sample_times.size(), 4});
  for (std::size_t t = 0; t < sample_times.size(); ++t) {
    out.signals.at(t, kCurrent) = current[t];
    out.signals.at(t, kVoltage) = voltage[t];
    out.signals.at(t, kTemperature) = temperature[t];
    out.signals.at(t, kSampleTime) = sample_times[t];
  }
  out.delta_t_hours = prepared.delta_t_hours;
  out.soh_label = prepared.soh_pct;
  out.battery_id = c.battery_id;
  out.cycle_index = c.cycle_index;
  return out;
}

}  // namespace sambamixer::dataset
