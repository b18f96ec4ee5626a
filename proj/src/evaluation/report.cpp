// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/evaluation/report.hpp"

#include <cerrno>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "sambamixer/error.hpp"

namespace sambamixer::evaluation {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw std::system_error(errno, std::generic_category(), "error writing " + path.string());
}

std::vector<std::vector<std::string>> read_rows(const std::string& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot read " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != columns)
      throw ParseError(path + ": expected " + std::to_string(columns) + " fields, got " + std::to_string(fields.size()),
                       line_no);
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::optional<int> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stoi(s);
}

}  // namespace

std::string report_stem(const MetricsReport& r) { return r.battery_id + "_start" + std::to_string(r.start_cycle); }

void emit_report(const std::vector<MetricsReport>& reports, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path summary_path = fs::path(dir) / "summary.csv";
  std::ofstream summary = open_out(summary_path);
  summary << "battery_id,start_cycle,mae,rmse,mape,eol_gt,eol_pred,aeole\n";
  for (const MetricsReport& r : reports) {
    // Tolerate rounding at equality; mae > rmse otherwise means broken bookkeeping.
    if (r.mae > r.rmse * (1 + 1e-12) + 1e-12)
      throw std::logic_error("report for " + report_stem(r) + " has mae " + num(r.mae) + " > rmse " + num(r.rmse));
    summary << r.battery_id << ',' << r.start_cycle << ',' << num(r.mae) << ',' << num(r.rmse) << ','
            << num(r.mape) << ',' << opt(r.eol_gt) << ',' << opt(r.eol_pred) << ',' << r.aeole << '\n';

    const fs::path cycles_path = fs::path(dir) / (report_stem(r) + ".csv");
    const fs::path plot_path = fs::path(dir) / (report_stem(r) + "_plot.csv");
    std::ofstream cycles = open_out(cycles_path);
    std::ofstream plot = open_out(plot_path);
    cycles << "cycle,soh_gt,soh_pred,abs_err\n";
    plot << "cycle,soh_gt,soh_pred,abs_err,threshold,eol_gt_marker,eol_pred_marker\n";
    for (const CycleResult& c : r.cycles) {
      const std::string row =
          std::to_string(c.cycle_index) + ',' + num(c.soh_gt) + ',' + num(c.soh_pred) + ',' + num(c.abs_err);
      cycles << row << '\n';
      plot << row << ',' << num(r.eol_threshold_pct) << ',' << (r.eol_gt == c.cycle_index ? 1 : 0) << ','
           << (r.eol_pred == c.cycle_index ? 1 : 0) << '\n';
    }
    close_out(cycles, cycles_path);
    close_out(plot, plot_path);
  }
  close_out(summary, summary_path);
}

std::vector<SummaryRow> read_summary_csv(const std::string& path) {
  std::vector<SummaryRow> out;
  for (const auto& f : read_rows(path, 8)) {
    SummaryRow r;
    r.battery_id = f[0];
    r.start_cycle = std::stoi(f[1]);
    r.mae = static_cast<Real>(std::stod(f[2]));
    r.rmse = static_cast<Real>(std::stod(f[3]));
    r.mape = static_cast<Real>(std::stod(f[4]));
    r.eol_gt = parse_opt(f[5]);
    r.eol_pred = parse_opt(f[6]);
    r.aeole = std::stoi(f[7]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CycleResult> read_cycle_csv(const std::string& path) {
  std::vector<CycleResult> out;
  for (const auto& f : read_rows(path, 4)) {
    out.push_back({std::stoi(f[0]), static_cast<Real>(std::stod(f[1])), static_cast<Real>(std::stod(f[2])),
                   static_cast<Real>(std::stod(f[3]))});
  }
  return out;
}

}  // namespace sambamixer::evaluation
