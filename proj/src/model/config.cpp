// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/model/config.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "sambamixer/error.hpp"

namespace sambamixer::model {

using mixer::Backbone;

std::string to_string(ClsMode mode) {
  switch (mode) {
    case ClsMode::kNone: return "none";
    case ClsMode::kHead: return "head";
    case ClsMode::kMiddle: return "middle";
    case ClsMode::kTail: return "tail";
  }
  return "?";
}

std::string to_string(PeMode mode) {
  switch (mode) {
    case PeMode::kNone: return "none";
    case PeMode::kSampleTime: return "sample-time";
    case PeMode::kSampleTimeAndCycleDiff: return "sample-time+cycle-diff";
  }
  return "?";
}

std::string to_string(Backbone backbone) {
  return backbone == Backbone::kSambaMixer ? "sambamixer" : "vanilla-mamba";
}

ClsMode parse_cls_mode(const std::string& text) {
  if (text == "none") return ClsMode::kNone;
  if (text == "head") return ClsMode::kHead;
  if (text == "middle") return ClsMode::kMiddle;
  if (text == "tail") return ClsMode::kTail;
  throw ConfigError("unknown cls mode '" + text + "' (expected none, head, middle or tail)");
}

PeMode parse_pe_mode(const std::string& text) {
  if (text == "none") return PeMode::kNone;
  if (text == "sample-time") return PeMode::kSampleTime;
  if (text == "sample-time+cycle-diff") return PeMode::kSampleTimeAndCycleDiff;
  throw ConfigError("unknown positional encoding '" + text +
                    "' (expected none, sample-time or sample-time+cycle-diff)");
}

Backbone parse_backbone(const std::string& text) {
  if (text == "sambamixer") return Backbone::kSambaMixer;
  if (text == "vanilla-mamba") return Backbone::kVanillaMamba;
  throw ConfigError("unknown backbone '" + text + "' (expected sambamixer or vanilla-mamba)");
}

void ModelConfig::validate() const {
  if (d_model == 0 || d_model % 2 != 0) throw ConfigError("d_model must be positive and even");
  if (d_model < 2) throw ConfigError("d_model must be at least 2");
  if (d_state == 0) throw ConfigError("d_state must be positive");
  if (num_layers == 0) throw ConfigError("num_layers must be positive");
  if (num_samples < 2) throw ConfigError("num_samples must be at least 2");
  if (expansion_factor == 0) throw ConfigError("expansion_factor must be positive");
  if (conv_width == 0) throw ConfigError("conv_width must be positive");
  if (!(droppath_rate >= 0.0 && droppath_rate < 1.0)) throw ConfigError("droppath_rate must lie in [0, 1)");
}

ModelConfig preset(const std::string& name) {
  std::string key = name;
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::toupper(c); });
  if (key.rfind("SAMBAMIXER-", 0) == 0) key = key.substr(11);
  ModelConfig c;
  if (key == "S") {
    c.d_model = 256, c.d_state = 16, c.num_layers = 8;
  } else if (key == "M") {
    c.d_model = 512, c.d_state = 16, c.num_layers = 8;
  } else if (key == "L") {
    c.d_model = 768, c.d_state = 24, c.num_layers = 12;
  } else if (key == "XL") {
    c.d_model = 1024, c.d_state = 24, c.num_layers = 12;
  } else {
    throw ConfigError("unknown model preset '" + name + "' (expected S, M, L or XL)");
  }
  return c;
}

std::vector<std::string> preset_names() { return {"S", "M", "L", "XL"}; }

nlohmann::json to_json(const ModelConfig& c) {
  return {{"d_model", c.d_model},
          {"d_state", c.d_state},
          {"num_layers", c.num_layers},
          {"num_samples", c.num_samples},
          {"cls_mode", to_string(c.cls_mode)},
          {"droppath_rate", c.droppath_rate},
          {"expansion_factor", c.expansion_factor},
          {"conv_width", c.conv_width},
          {"backbone", to_string(c.backbone)},
          {"pe_mode", to_string(c.pe_mode)}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("model config must be an object");
  static const std::set<std::string> kKeys{"preset",       "d_model",          "d_state",    "num_layers",
                                           "num_samples",  "cls_mode",         "droppath_rate",
                                           "expansion_factor", "conv_width",   "backbone",   "pe_mode"};
  for (const auto& [key, value] : j.items())
    if (!kKeys.count(key)) throw ConfigError("unknown model config key '" + key + "'");
  try {
    ModelConfig c = j.contains("preset") ? preset(j.at("preset").get<std::string>()) : ModelConfig{};
    auto size = [&](const char* key, std::size_t& dst) {
      if (!j.contains(key)) return;
      const auto v = j.at(key).get<long long>();
      if (v < 0) throw ConfigError(std::string(key) + " must be non-negative");
      dst = static_cast<std::size_t>(v);
    };
    size("d_model", c.d_model);
    size("d_state", c.d_state);
    size("num_layers", c.num_layers);
    size("num_samples", c.num_samples);
    size("expansion_factor", c.expansion_factor);
    size("conv_width", c.conv_width);
    if (j.contains("droppath_rate")) c.droppath_rate = j.at("droppath_rate").get<double>();
    if (j.contains("cls_mode")) c.cls_mode = parse_cls_mode(j.at("cls_mode").get<std::string>());
    if (j.contains("backbone")) c.backbone = parse_backbone(j.at("backbone").get<std::string>());
    if (j.contains("pe_mode")) c.pe_mode = parse_pe_mode(j.at("pe_mode").get<std::string>());
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
}

}  // namespace sambamixer::model
