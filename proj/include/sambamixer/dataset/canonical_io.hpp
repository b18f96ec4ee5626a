// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sambamixer/dataset/cycle.hpp"

namespace sambamixer::dataset {

inline constexpr const char* kCyclesSchemaVersion = "cycles-v1";

// Reads one cycles-v1 file (one JSON object per line) or every *.jsonl file of a
// directory. Result is sorted by (battery_id, start_time).
// Throws ParseError (with line number) on malformed records and FormatError on a
// schema_version mismatch.
std::vector<DischargeCycle> load_canonical(const std::filesystem::path& path);

// Parses a single record; `line` is only used for error messages.
DischargeCycle parse_cycle_record(const std::string& text, std::size_t line = 0);
std::string format_cycle_record(const DischargeCycle& cycle);

void write_canonical(const std::filesystem::path& file, std::span<const DischargeCycle> cycles);

}  // namespace sambamixer::dataset
