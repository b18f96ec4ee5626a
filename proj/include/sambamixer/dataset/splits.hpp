// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sambamixer/dataset/cycle.hpp"

namespace sambamixer::dataset {

struct DatasetSplit {
  std::string name;
  std::vector<int> train_ids;
  std::vector<int> eval_ids;
};

DatasetSplit nasa_split(const std::string& name);  // "NASA-S", "NASA-M", "NASA-L"; ConfigError otherwise
std::vector<std::string> split_names();

// Digits of the identifier ("B0005" -> 5, "battery_47" -> 47); nullopt when there are none.
std::optional<int> battery_number(const std::string& battery_id);
std::string battery_name(int number);  // 5 -> "B0005"

struct SplitBatteries {
  std::vector<Battery> train;
  std::vector<Battery> eval;
  std::vector<int> missing;  // split members without data
};

SplitBatteries apply_split(const std::vector<Battery>& batteries, const DatasetSplit& split);

}  // namespace sambamixer::dataset
