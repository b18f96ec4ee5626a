// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/cli/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "sambamixer/dataset/cycle.hpp"

namespace sambamixer::cli {

std::string git_blob_hash(const std::string& content) {
  const std::string data = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("SHA-1 digest failed");
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string git_blob_hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return git_blob_hash(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
}

void RunManifest::add_input(const std::string& path) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(path, ec))
      if (e.is_regular_file()) files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) add_input(f);
    return;
  }
  try {
    inputs.emplace_back(path, git_blob_hash_file(path));
  } catch (const std::runtime_error&) {
  }
}

std::string RunManifest::input_hash() const {
  std::vector<std::string> lines;
  for (const auto& [path, hash] : inputs) lines.push_back(hash + ' ' + path + '\n');
  std::sort(lines.begin(), lines.end());
  std::string listing;
  for (const auto& l : lines) listing += l;
  return git_blob_hash(listing);
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [path, hash] : inputs) files.push_back({{"path", path}, {"hash", hash}});
  return {{"command", command},
          {"config_path", config_path},
          {"seed", seed ? nlohmann::json(*seed) : nlohmann::json()},
          {"inputs", files},
          {"input_hash", input_hash()},
          {"output_dir", output_dir},
          {"started_at", started_at},
          {"finished_at", finished_at},
          {"exit_code", exit_code},
          {"message", message}};
}

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  return dataset::format_iso8601(std::chrono::duration<double>(now).count());
}

void write_manifest(const std::string& dir, const RunManifest& manifest) {
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / "run_manifest.json").string();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << manifest.to_json().dump(2) << '\n';
}

}  // namespace sambamixer::cli
