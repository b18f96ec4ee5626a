// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/dataset/preprocess.hpp"

#include <cmath>
#include <map>

#include "sambamixer/error.hpp"

namespace sambamixer::dataset {

Real soh_label(Real capacity_ah, Real reference_capacity_ah) {
  if (!(reference_capacity_ah > 0)) throw ParameterError("soh_label: reference capacity must be positive");
  return Real{100} * capacity_ah / reference_capacity_ah;
}

std::size_t truncate_after_disconnect(DischargeCycle& c, Real threshold_a) {
  std::size_t keep = c.current.size();
  while (keep > 0 && std::abs(c.current[keep - 1]) < threshold_a) --keep;
  const std::size_t removed = c.current.size() - keep;
  if (removed == 0) return 0;
  c.current.resize(keep);
  c.voltage.resize(keep);
  c.temperature.resize(keep);
  c.time.resize(keep);
  return removed;
}

std::vector<Battery> preprocess(std::vector<DischargeCycle> cycles, const PreprocessOptions& options,
                                PreprocessReport* report) {
  PreprocessReport local;
  PreprocessReport& rep = report ? *report : local;

  std::vector<std::string> order;
  std::map<std::string, std::vector<DischargeCycle>> grouped;
  for (auto& c : cycles) {
    if (!grouped.count(c.battery_id)) order.push_back(c.battery_id);
    grouped[c.battery_id].push_back(std::move(c));
  }

  std::vector<Battery> batteries;
  for (const std::string& id : order) {
    Battery battery;
    battery.id = id;
    Real previous_soh = 0;
    double previous_start = 0;
    for (DischargeCycle& c : grouped[id]) {
      rep.truncated_samples += truncate_after_disconnect(c, options.disconnect_current_a);
      if (c.samples() < 2 || c.capacity_ah < options.min_capacity_ah) {
        ++rep.dropped_cycles;
        continue;
      }
      if (battery.cycles.empty()) battery.reference_capacity_ah = c.capacity_ah;
      const Real soh = soh_label(c.capacity_ah, battery.reference_capacity_ah);
      if (!battery.cycles.empty() && soh < previous_soh - options.max_soh_drop_pct) {
        ++rep.dropped_cycles;
        continue;
      }
      PreparedCycle prepared;
      prepared.soh_pct = soh;
      prepared.delta_t_hours =
          battery.cycles.empty() ? Real{0} : static_cast<Real>((c.start_time - previous_start) / 3600.0);
      previous_soh = soh;
      previous_start = c.start_time;
      prepared.cycle = std::move(c);
      prepared.cycle.cycle_index = static_cast<int>(battery.cycles.size());
      battery.cycles.push_back(std::move(prepared));
    }
    if (battery.cycles.size() < 2) {
      rep.excluded_batteries.push_back(id);
      rep.warnings.push_back("battery " + id + " excluded: fewer than 2 cycles survive preprocessing");
      continue;
    }
    batteries.push_back(std::move(battery));
  }
  return batteries;
}

}  // namespace sambamixer::dataset
