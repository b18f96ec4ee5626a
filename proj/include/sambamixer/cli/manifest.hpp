// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace sambamixer::cli {

// Hex SHA-1 of "blob <size>\0<content>", as `git hash-object` prints it.
std::string git_blob_hash(const std::string& content);
std::string git_blob_hash_file(const std::string& path);

struct RunManifest {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, std::string>> inputs;  // (path, blob hash)
  std::string output_dir;
  std::string started_at;
  std::string finished_at;
  int exit_code{0};
  std::string message;

  // Hashes a file, or every regular file below a directory, into `inputs`. Unreadable
  // paths are skipped.
  void add_input(const std::string& path);
  // Blob hash of the sorted "<hash> <path>" listing, a single fingerprint of all inputs.
  std::string input_hash() const;
  nlohmann::json to_json() const;
};

std::string utc_now_iso8601();
// Writes <dir>/run_manifest.json, creating dir if needed.
void write_manifest(const std::string& dir, const RunManifest& manifest);

}  // namespace sambamixer::cli
