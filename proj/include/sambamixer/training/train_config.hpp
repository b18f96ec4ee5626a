// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "sambamixer/dataset/resample.hpp"
#include "sambamixer/model/config.hpp"

namespace sambamixer::training {

using numerics::Real;

struct TrainConfig {
  double lr{1e-4};
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
  double weight_decay{5e-2};
  int epochs{60};
  int batch_size{32};
  int lr_halving_period{20};  // epochs
  double droppath_rate{0.2};
  std::uint64_t seed{0};
  dataset::ResampleMode resample_mode_train{dataset::ResampleMode::kAnchor};
  dataset::ResampleMode resample_mode_eval{dataset::ResampleMode::kLinear};
  double grad_clip_norm{1.0};  // 0 disables clipping
  int steps_per_epoch{0};      // 0: training pool size / batch size
  int workers{1};              // threads assembling and differentiating a batch

  // Throws ConfigError on non-positive sizes/rates, droppath outside [0, 1) or a
  // non-linear evaluation resampler.
  void validate() const;
  // lr * 0.5^floor(epoch / lr_halving_period), epochs counted from 0.
  double lr_at_epoch(int epoch) const;
};

// Run description: {"split": "...", "model": {...}, "train": {...}}.
struct RunConfig {
  std::string split{"NASA-L"};
  model::ModelConfig model;
  TrainConfig train;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);
// The training drop-path rate is copied into the model config. Throws ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

}  // namespace sambamixer::training
