// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/dataset/canonical_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <tuple>

#include <json.hpp>

#include "sambamixer/error.hpp"

namespace sambamixer::dataset {

using nlohmann::json;

namespace {

std::vector<Real> read_array(const json& record, const char* key, std::size_t line) {
  const auto it = record.find(key);
  if (it == record.end() || !it->is_array()) throw ParseError(std::string("missing array field '") + key + "'", line);
  std::vector<Real> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number()) throw ParseError(std::string("non-numeric entry in '") + key + "'", line);
    out.push_back(v.get<Real>());
  }
  return out;
}

template <typename T>
T read_field(const json& record, const char* key, std::size_t line) {
  const auto it = record.find(key);
  if (it == record.end()) throw ParseError(std::string("missing field '") + key + "'", line);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type", line);
  }
}

void append_array(std::string& out, const char* key, const std::vector<Real>& values) {
  out += ",\"";
  out += key;
  out += "\":[";
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, i ? ",%.17g" : "%.17g", static_cast<double>(values[i]));
    out += buf;
  }
  out += ']';
}

std::vector<DischargeCycle> load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<DischargeCycle> cycles;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      cycles.push_back(parse_cycle_record(text, line));
    } catch (const ParseError& e) {
      throw ParseError::in_file(path.filename().string(), e);
    }
  }
  return cycles;
}

}  // namespace

DischargeCycle parse_cycle_record(const std::string& text, std::size_t line) {
  json record;
  try {
    record = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line);
  }
  if (!record.is_object()) throw ParseError("record is not an object", line);
  const auto version = read_field<std::string>(record, "schema_version", line);
  if (version != kCyclesSchemaVersion) {
    throw FormatError("line " + std::to_string(line) + ": unsupported schema_version '" + version + "', expected '" +
                      kCyclesSchemaVersion + "'");
  }
  DischargeCycle c;
  c.battery_id = read_field<std::string>(record, "battery_id", line);
  c.cycle_index = read_field<int>(record, "cycle_index", line);
  c.start_time = parse_iso8601(read_field<std::string>(record, "start_time", line));
  c.capacity_ah = read_field<Real>(record, "capacity_ah", line);
  c.current = read_array(record, "i_a", line);
  c.voltage = read_array(record, "v_v", line);
  c.temperature = read_array(record, "t_c", line);
  c.time = read_array(record, "s_s", line);
  try {
    validate_cycle(c);
  } catch (const ParameterError& e) {
    throw ParseError(e.what(), line);
  }
  return c;
}

std::string format_cycle_record(const DischargeCycle& c) {
  json head;
  head["schema_version"] = kCyclesSchemaVersion;
  head["battery_id"] = c.battery_id;
  head["cycle_index"] = c.cycle_index;
  head["start_time"] = format_iso8601(c.start_time);
  char cap[32];
  std::snprintf(cap, sizeof cap, "%.17g", static_cast<double>(c.capacity_ah));
  std::string out = head.dump();
  out.pop_back();  // reopen the object to append the arrays in a fixed format
  out += ",\"capacity_ah\":";
  out += cap;
  append_array(out, "i_a", c.current);
  append_array(out, "v_v", c.voltage);
  append_array(out, "t_c", c.temperature);
  append_array(out, "s_s", c.time);
  out += '}';
  return out;
}

std::vector<DischargeCycle> load_canonical(const std::filesystem::path& path) {
  std::vector<DischargeCycle> cycles;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto part = load_file(f);
      cycles.insert(cycles.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
  } else {
    if (!std::filesystem::exists(path)) throw ParseError("no such file or directory: " + path.string());
    cycles = load_file(path);
  }
  std::stable_sort(cycles.begin(), cycles.end(), [](const DischargeCycle& a, const DischargeCycle& b) {
    return std::tie(a.battery_id, a.start_time) < std::tie(b.battery_id, b.start_time);
  });
  return cycles;
}

void write_canonical(const std::filesystem::path& file, std::span<const DischargeCycle> cycles) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  for (const auto& c : cycles) out << format_cycle_record(c) << '\n';
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

}  // namespace sambamixer::dataset
