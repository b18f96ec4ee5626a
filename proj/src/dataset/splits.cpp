// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/dataset/splits.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "sambamixer/error.hpp"

namespace sambamixer::dataset {

DatasetSplit nasa_split(const std::string& name) {
  const std::vector<int> eval{6, 7, 47};
  if (name == "NASA-S") return {name, {5, 25, 29, 48}, eval};
  if (name == "NASA-M") return {name, {5, 18, 45, 46, 48}, eval};
  if (name == "NASA-L") return {name, {5, 18, 31, 34, 36, 45, 46, 48, 54, 55, 56}, eval};
  throw ConfigError("unknown split '" + name + "' (expected NASA-S, NASA-M or NASA-L)");
}

std::vector<std::string> split_names() { return {"NASA-S", "NASA-M", "NASA-L"}; }

std::optional<int> battery_number(const std::string& id) {
  std::string digits;
  for (char ch : id)
    if (std::isdigit(static_cast<unsigned char>(ch))) digits += ch;
  if (digits.empty() || digits.size() > 9) return std::nullopt;
  return std::stoi(digits);
}

std::string battery_name(int number) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "B%04d", number);
  return buf;
}

SplitBatteries apply_split(const std::vector<Battery>& batteries, const DatasetSplit& split) {
  SplitBatteries out;
  auto pick = [&](const std::vector<int>& ids, std::vector<Battery>& dst) {
    for (int id : ids) {
      auto it = std::find_if(batteries.begin(), batteries.end(),
                             [&](const Battery& b) { return battery_number(b.id) == id; });
      if (it == batteries.end()) {
        out.missing.push_back(id);
      } else {
        dst.push_back(*it);
      }
    }
  };
  pick(split.train_ids, out.train);
  pick(split.eval_ids, out.eval);
  return out;
}

}  // namespace sambamixer::dataset
