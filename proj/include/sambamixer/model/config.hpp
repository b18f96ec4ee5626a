// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "sambamixer/mixer/encoder.hpp"

namespace sambamixer::model {

using numerics::Real;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

enum class ClsMode { kNone, kHead, kMiddle, kTail };
enum class PeMode { kNone, kSampleTime, kSampleTimeAndCycleDiff };

std::string to_string(ClsMode mode);
std::string to_string(PeMode mode);
std::string to_string(mixer::Backbone backbone);
ClsMode parse_cls_mode(const std::string& text);             // none | head | middle | tail
PeMode parse_pe_mode(const std::string& text);               // none | sample-time | sample-time+cycle-diff
mixer::Backbone parse_backbone(const std::string& text);     // sambamixer | vanilla-mamba

struct ModelConfig {
  std::size_t d_model{256};
  std::size_t d_state{16};
  std::size_t num_layers{8};
  std::size_t num_samples{128};
  ClsMode cls_mode{ClsMode::kNone};
  double droppath_rate{0.2};
  std::size_t expansion_factor{2};
  std::size_t conv_width{4};
  mixer::Backbone backbone{mixer::Backbone::kSambaMixer};
  PeMode pe_mode{PeMode::kSampleTimeAndCycleDiff};

  // Tokens entering the encoder: num_samples, plus one with a CLS token.
  std::size_t token_count() const noexcept { return num_samples + (cls_mode == ClsMode::kNone ? 0 : 1); }
  // Throws ConfigError on unusable values (odd d_model, num_samples < 2, ...).
  void validate() const;
};

// "S", "M", "L", "XL" (case-insensitive, "SambaMixer-" prefix accepted). ConfigError otherwise.
ModelConfig preset(const std::string& name);
std::vector<std::string> preset_names();

nlohmann::json to_json(const ModelConfig& config);
// Missing keys keep their defaults; a "preset" key seeds the defaults. Unknown keys are rejected.
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace sambamixer::model
