// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sambamixer/dataset/cycle.hpp"
#include "sambamixer/evaluation/metrics.hpp"
#include "sambamixer/model/sambamixer.hpp"

namespace sambamixer::evaluation {

struct CycleResult {
  int cycle_index{0};  // relative to the start cycle
  Real soh_gt{0};
  Real soh_pred{0};
  Real abs_err{0};
};

struct MetricsReport {
  std::string battery_id;
  int start_cycle{0};
  Real eol_threshold_pct{kDefaultEolThreshold};
  std::vector<CycleResult> cycles;
  Real mae{0};
  Real rmse{0};
  Real mape{0};
  std::optional<int> eol_gt;
  std::optional<int> eol_pred;
  int aeole{0};
};

using Predictor = std::function<Real(const dataset::ResampledCycle&)>;

// Metrics and EOL indices of given series (cycle indices 0..K-1).
MetricsReport score_series(const std::string& battery_id, int start_cycle, const std::vector<Real>& gt,
                           const std::vector<Real>& pred, Real threshold = kDefaultEolThreshold);

// Drops the cycles before start_cycle, linearly resamples each remaining cycle to
// num_samples points and predicts every cycle on its own. Throws ParameterError when
// start_cycle is outside [0, cycle count).
MetricsReport evaluate_battery(const Predictor& predictor, const dataset::Battery& battery, int start_cycle,
                               int num_samples, Real threshold = kDefaultEolThreshold);
MetricsReport evaluate_battery(const model::SambaMixerModel& model, const dataset::Battery& battery,
                               int start_cycle, Real threshold = kDefaultEolThreshold);

// Linear resampling of every cycle of the battery.
std::vector<dataset::ResampledCycle> resample_battery_linear(const dataset::Battery& battery, int num_samples,
                                                             int start_cycle = 0);

// Pooled metrics over several reports (every cycle weighted equally).
struct PooledMetrics {
  Real mae{0};
  Real rmse{0};
  Real mape{0};
};
PooledMetrics pool(const std::vector<MetricsReport>& reports);

}  // namespace sambamixer::evaluation
