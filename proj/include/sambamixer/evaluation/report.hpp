// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "sambamixer/evaluation/evaluate.hpp"

namespace sambamixer::evaluation {

struct SummaryRow {
  std::string battery_id;
  int start_cycle{0};
  Real mae{0};
  Real rmse{0};
  Real mape{0};
  std::optional<int> eol_gt;
  std::optional<int> eol_pred;
  int aeole{0};
};

// Per-report file stem: "<battery>_start<k>".
std::string report_stem(const MetricsReport& report);

// Writes into `dir` (created if needed):
//   summary.csv                battery_id,start_cycle,mae,rmse,mape,eol_gt,eol_pred,aeole
//   <stem>.csv                 cycle,soh_gt,soh_pred,abs_err
//   <stem>_plot.csv            cycle,soh_gt,soh_pred,abs_err,threshold,eol_gt_marker,eol_pred_marker
// A missing EOL is an empty field. Throws std::logic_error if a report has mae > rmse and
// std::system_error on I/O failure.
void emit_report(const std::vector<MetricsReport>& reports, const std::string& dir);

std::vector<SummaryRow> read_summary_csv(const std::string& path);
std::vector<CycleResult> read_cycle_csv(const std::string& path);

}  // namespace sambamixer::evaluation
