// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "sambamixer/model/sambamixer.hpp"

namespace sambamixer::model {

inline constexpr const char* kCheckpointVersion = "sambamixer-ckpt-v1";

// On disk: 8-byte magic "SMBCKPT1", u32 LE header size, JSON header
// {version, config, step, extras, tensors: [{name, shape, offset}]}, then every tensor
// as contiguous little-endian float64 values at its byte offset into the data block.
struct NamedTensor {
  std::string name;
  Tensor value;
};

struct Checkpoint {
  ModelConfig config;
  std::int64_t step{0};
  nlohmann::json extras = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const Tensor* find(const std::string& name) const;
};

// Writes through a temporary file and renames it into place.
void write_checkpoint(const std::string& path, const Checkpoint& checkpoint);
// FormatError on bad magic, version, truncation or a malformed header.
Checkpoint read_checkpoint(const std::string& path);

// Model parameters plus normalization statistics (stored under extras.norm_stats).
Checkpoint make_checkpoint(const SambaMixerModel& model, std::int64_t step);
// Rebuilds the model; FormatError when a parameter is missing or has the wrong shape.
SambaMixerModel model_from_checkpoint(const Checkpoint& checkpoint);
void load_parameters(SambaMixerModel& model, const Checkpoint& checkpoint);

nlohmann::json to_json(const dataset::NormStats& stats);
dataset::NormStats norm_stats_from_json(const nlohmann::json& j);

}  // namespace sambamixer::model
