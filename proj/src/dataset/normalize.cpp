// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/dataset/normalize.hpp"

#include <cmath>

#include "sambamixer/error.hpp"

namespace sambamixer::dataset {

void NormStats::apply(Tensor& signals) const {
  if (signals.rank() != 2 || signals.dim(1) != 4)
    throw DimensionError("NormStats::apply: expected [L x 4], got " + numerics::shape_string(signals.shape()));
  for (std::size_t t = 0; t < signals.dim(0); ++t)
    for (std::size_t ch = 0; ch < 3; ++ch) signals.at(t, ch) = (signals.at(t, ch) - mean[ch]) / stddev[ch];
}

NormStats fit_norm_stats(const std::vector<Battery>& train, std::vector<std::string>* warnings) {
  // Two passes in long double; the sample counts reach the millions.
  std::array<long double, 3> sum{0, 0, 0};
  std::size_t n = 0;
  for (const Battery& b : train)
    for (const PreparedCycle& p : b.cycles) {
      const DischargeCycle& c = p.cycle;
      for (std::size_t i = 0; i < c.samples(); ++i) {
        sum[0] += c.current[i];
        sum[1] += c.voltage[i];
        sum[2] += c.temperature[i];
      }
      n += c.samples();
    }
  if (n == 0) throw ParameterError("fit_norm_stats: empty training set");

  NormStats stats;
  for (std::size_t ch = 0; ch < 3; ++ch) stats.mean[ch] = static_cast<Real>(sum[ch] / n);
  std::array<long double, 3> sq{0, 0, 0};
  for (const Battery& b : train)
    for (const PreparedCycle& p : b.cycles) {
      const DischargeCycle& c = p.cycle;
      for (std::size_t i = 0; i < c.samples(); ++i) {
        const long double d[3] = {c.current[i] - stats.mean[0], c.voltage[i] - stats.mean[1],
                                  c.temperature[i] - stats.mean[2]};
        for (std::size_t ch = 0; ch < 3; ++ch) sq[ch] += d[ch] * d[ch];
      }
    }
  static const char* kNames[3] = {"current", "voltage", "temperature"};
  for (std::size_t ch = 0; ch < 3; ++ch) {
    const Real sd = static_cast<Real>(std::sqrt(sq[ch] / n));
    if (sd > 0 && std::isfinite(sd)) {
      stats.stddev[ch] = sd;
    } else {
      stats.stddev[ch] = 1;
      if (warnings) warnings->push_back(std::string("normalization: ") + kNames[ch] + " has zero spread, using std = 1");
    }
  }
  return stats;
}

}  // namespace sambamixer::dataset
