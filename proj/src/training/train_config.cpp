// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/training/train_config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "sambamixer/dataset/splits.hpp"
#include "sambamixer/error.hpp"

namespace sambamixer::training {

void TrainConfig::validate() const {
  if (!(lr > 0)) throw ConfigError("lr must be positive");
  if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1)) throw ConfigError("betas must lie in (0, 1)");
  if (!(eps > 0)) throw ConfigError("eps must be positive");
  if (!(weight_decay >= 0)) throw ConfigError("weight_decay must be non-negative");
  if (epochs <= 0) throw ConfigError("epochs must be positive");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (lr_halving_period <= 0) throw ConfigError("lr_halving_period must be positive");
  if (!(droppath_rate >= 0 && droppath_rate < 1)) throw ConfigError("droppath_rate must lie in [0, 1)");
  if (!(grad_clip_norm >= 0)) throw ConfigError("grad_clip_norm must be non-negative");
  if (steps_per_epoch < 0) throw ConfigError("steps_per_epoch must be non-negative");
  if (workers <= 0) throw ConfigError("workers must be positive");
  if (resample_mode_eval != dataset::ResampleMode::kLinear)
    throw ConfigError("evaluation resampling must be linear");
}

double TrainConfig::lr_at_epoch(int epoch) const {
  return std::ldexp(lr, -(epoch / lr_halving_period));
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps", c.eps},
          {"weight_decay", c.weight_decay},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr_halving_period", c.lr_halving_period},
          {"droppath_rate", c.droppath_rate},
          {"seed", c.seed},
          {"resample_mode_train", dataset::to_string(c.resample_mode_train)},
          {"resample_mode_eval", dataset::to_string(c.resample_mode_eval)},
          {"grad_clip_norm", c.grad_clip_norm},
          {"steps_per_epoch", c.steps_per_epoch},
          {"workers", c.workers}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("train config must be an object");
  static const std::set<std::string> kKeys{"lr",           "beta1",       "beta2",
                                           "eps",          "weight_decay", "epochs",
                                           "batch_size",   "lr_halving_period", "droppath_rate",
                                           "seed",         "resample_mode_train", "resample_mode_eval",
                                           "grad_clip_norm", "steps_per_epoch", "workers"};
  for (const auto& [key, value] : j.items())
    if (!kKeys.count(key)) throw ConfigError("unknown train config key '" + key + "'");
  TrainConfig c;
  try {
    auto get = [&](const char* key, auto& dst) {
      if (j.contains(key)) dst = j.at(key).get<std::decay_t<decltype(dst)>>();
    };
    get("lr", c.lr);
    get("beta1", c.beta1);
    get("beta2", c.beta2);
    get("eps", c.eps);
    get("weight_decay", c.weight_decay);
    get("epochs", c.epochs);
    get("batch_size", c.batch_size);
    get("lr_halving_period", c.lr_halving_period);
    get("droppath_rate", c.droppath_rate);
    get("seed", c.seed);
    get("grad_clip_norm", c.grad_clip_norm);
    get("steps_per_epoch", c.steps_per_epoch);
    get("workers", c.workers);
    if (j.contains("resample_mode_train"))
      c.resample_mode_train = dataset::parse_resample_mode(j.at("resample_mode_train").get<std::string>());
    if (j.contains("resample_mode_eval"))
      c.resample_mode_eval = dataset::parse_resample_mode(j.at("resample_mode_eval").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"split", c.split}, {"model", model::to_json(c.model)}, {"train", to_json(c.train)}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("run config must be an object");
  for (const auto& [key, value] : j.items())
    if (key != "split" && key != "model" && key != "train") throw ConfigError("unknown config key '" + key + "'");
  RunConfig c;
  try {
    if (j.contains("split")) c.split = j.at("split").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("split: ") + e.what());
  }
  dataset::nasa_split(c.split);
  if (j.contains("model")) c.model = model::model_config_from_json(j.at("model"));
  if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
  const bool train_sets_rate = j.contains("train") && j.at("train").contains("droppath_rate");
  if (!train_sets_rate && j.contains("model") && j.at("model").contains("droppath_rate"))
    c.train.droppath_rate = c.model.droppath_rate;
  c.model.droppath_rate = c.train.droppath_rate;
  c.model.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return run_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace sambamixer::training
