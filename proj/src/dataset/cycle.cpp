// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/dataset/cycle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <regex>

#include "sambamixer/error.hpp"

namespace sambamixer::dataset {

void validate_cycle(const DischargeCycle& c) {
  const std::string where = "cycle " + std::to_string(c.cycle_index) + " of battery " + c.battery_id;
  const std::size_t n = c.time.size();
  if (c.current.size() != n || c.voltage.size() != n || c.temperature.size() != n) {
    throw ParameterError(where + ": signal arrays have different lengths");
  }
  if (n < 2) throw ParameterError(where + ": needs at least 2 samples");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(c.time[i] > c.time[i - 1])) {
      throw ParameterError(where + ": sample time not strictly increasing at index " + std::to_string(i));
    }
  }
  if (!(c.capacity_ah > 0)) throw ParameterError(where + ": capacity must be positive");
}

double parse_iso8601(const std::string& text) {
  static const std::regex pattern(R"(^(\d{4})-(\d{2})-(\d{2})[T ](\d{2}):(\d{2}):(\d{2}(?:\.\d+)?)(Z|\+00:00)?$)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) throw ParseError("invalid ISO-8601 timestamp '" + text + "'");
  using namespace std::chrono;
  const year_month_day ymd{year{std::stoi(m[1])}, month{static_cast<unsigned>(std::stoi(m[2]))},
                           day{static_cast<unsigned>(std::stoi(m[3]))}};
  if (!ymd.ok()) throw ParseError("invalid calendar date in '" + text + "'");
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<double>(days) * 86400.0 + std::stoi(m[4]) * 3600.0 + std::stoi(m[5]) * 60.0 +
         std::stod(m[6]);
}

std::string format_iso8601(double seconds) {
  using namespace std::chrono;
  const double whole = std::floor(seconds);
  const auto days = static_cast<long long>(std::floor(whole / 86400.0));
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  double rem = seconds - static_cast<double>(days) * 86400.0;
  const int hh = static_cast<int>(rem / 3600.0);
  rem -= hh * 3600.0;
  const int mm = static_cast<int>(rem / 60.0);
  rem -= mm * 60.0;
  char buf[64];
  const double frac = rem - std::floor(rem);
  if (frac > 1e-9) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%09.6fZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hh, mm, rem);
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hh, mm,
                  static_cast<int>(std::floor(rem)));
  }
  return buf;
}

}  // namespace sambamixer::dataset
