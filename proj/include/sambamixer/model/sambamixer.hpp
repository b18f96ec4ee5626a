// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "sambamixer/dataset/cycle.hpp"
#include "sambamixer/dataset/normalize.hpp"
#include "sambamixer/mixer/encoder.hpp"
#include "sambamixer/model/config.hpp"

namespace sambamixer::model {

using numerics::Parameter;
using numerics::ParameterSet;

// Full SOH regressor: input projection, positional encodings, optional CLS token,
// encoder and regression head. Inputs are raw resampled cycles; the stored
// normalization statistics standardize I, V, T before projection.
class SambaMixerModel {
 public:
  SambaMixerModel(const ModelConfig& config, std::uint64_t seed);
  SambaMixerModel(SambaMixerModel&&) = default;
  SambaMixerModel& operator=(SambaMixerModel&&) = default;

  // Predicted SOH in percent as a [1 x 1] node. Throws DimensionError when the cycle
  // length differs from num_samples.
  Var forward(Tape& tape, const dataset::ResampledCycle& cycle, const mixer::DropPath& drop = {}) const;
  // Eval-mode prediction on a private tape; safe to call concurrently.
  Real predict(const dataset::ResampledCycle& cycle) const;
  std::vector<Real> predict(const std::vector<dataset::ResampledCycle>& cycles) const;

  const ModelConfig& config() const noexcept { return config_; }
  ParameterSet& parameters() noexcept { return params_; }
  const ParameterSet& parameters() const noexcept { return params_; }
  std::size_t parameter_count() const { return params_.element_count(); }

  const dataset::NormStats& norm_stats() const noexcept { return norm_; }
  void set_norm_stats(const dataset::NormStats& stats) { norm_ = stats; }

  Parameter& head_output_bias() const { return *head_b2_; }
  Parameter& projection_weight() const { return *proj_w_; }
  Parameter& projection_bias() const { return *proj_b_; }
  Parameter* cls_token() const { return cls_; }
  const mixer::Encoder& encoder() const noexcept { return encoder_; }

 private:
  ModelConfig config_;
  ParameterSet params_;
  dataset::NormStats norm_;
  Parameter* proj_w_{nullptr};
  Parameter* proj_b_{nullptr};
  Parameter* cls_{nullptr};
  mixer::Encoder encoder_;
  Parameter* head_w1_{nullptr};
  Parameter* head_b1_{nullptr};
  Parameter* head_w2_{nullptr};
  Parameter* head_b2_{nullptr};
};

}  // namespace sambamixer::model
