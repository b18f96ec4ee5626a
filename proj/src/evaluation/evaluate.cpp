// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/evaluation/evaluate.hpp"

#include <cmath>

#include "sambamixer/dataset/resample.hpp"
#include "sambamixer/error.hpp"

namespace sambamixer::evaluation {

MetricsReport score_series(const std::string& battery_id, int start_cycle, const std::vector<Real>& gt,
                           const std::vector<Real>& pred, Real threshold) {
  MetricsReport r;
  r.battery_id = battery_id;
  r.start_cycle = start_cycle;
  r.eol_threshold_pct = threshold;
  r.mae = mae(gt, pred);
  r.rmse = rmse(gt, pred);
  r.mape = mape(gt, pred);
  r.eol_gt = eol_index(gt, threshold);
  r.eol_pred = eol_index(pred, threshold);
  r.aeole = absolute_eol_error(r.eol_gt, r.eol_pred, static_cast<int>(gt.size()));
  r.cycles.reserve(gt.size());
  for (std::size_t k = 0; k < gt.size(); ++k)
    r.cycles.push_back({static_cast<int>(k), gt[k], pred[k], std::abs(gt[k] - pred[k])});
  return r;
}

std::vector<dataset::ResampledCycle> resample_battery_linear(const dataset::Battery& battery, int num_samples,
                                                             int start_cycle) {
  const int count = static_cast<int>(battery.cycles.size());
  if (start_cycle < 0 || start_cycle >= count)
    throw ParameterError("start cycle " + std::to_string(start_cycle) + " out of range for battery " + battery.id +
                         " with " + std::to_string(count) + " cycles");
  std::vector<dataset::ResampledCycle> out;
  out.reserve(static_cast<std::size_t>(count - start_cycle));
  for (int k = start_cycle; k < count; ++k) {
    const dataset::PreparedCycle& c = battery.cycles[static_cast<std::size_t>(k)];
    const auto times = dataset::resample_linear(c.cycle.time, num_samples);
    dataset::ResampledCycle r = dataset::interpolate_cycle(c, times);
    r.cycle_index = k - start_cycle;
    out.push_back(std::move(r));
  }
  return out;
}

MetricsReport evaluate_battery(const Predictor& predictor, const dataset::Battery& battery, int start_cycle,
                               int num_samples, Real threshold) {
  const auto cycles = resample_battery_linear(battery, num_samples, start_cycle);
  std::vector<Real> gt, pred;
  gt.reserve(cycles.size());
  pred.reserve(cycles.size());
  for (const auto& c : cycles) {
    gt.push_back(c.soh_label);
    pred.push_back(predictor(c));
  }
  return score_series(battery.id, start_cycle, gt, pred, threshold);
}

MetricsReport evaluate_battery(const model::SambaMixerModel& model, const dataset::Battery& battery,
                               int start_cycle, Real threshold) {
  return evaluate_battery([&model](const dataset::ResampledCycle& c) { return model.predict(c); }, battery,
                          start_cycle, static_cast<int>(model.config().num_samples), threshold);
}

PooledMetrics pool(const std::vector<MetricsReport>& reports) {
  std::vector<Real> gt, pred;
  for (const auto& r : reports)
    for (const auto& c : r.cycles) {
      gt.push_back(c.soh_gt);
      pred.push_back(c.soh_pred);
    }
  if (gt.empty()) throw ParameterError("pool: no evaluated cycles");
  return {mae(gt, pred), rmse(gt, pred), mape(gt, pred)};
}

}  // namespace sambamixer::evaluation
