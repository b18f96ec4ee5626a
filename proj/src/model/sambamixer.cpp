// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/model/sambamixer.hpp"

#include <cmath>
#include <random>

#include "sambamixer/error.hpp"
#include "sambamixer/model/embedding.hpp"
#include "sambamixer/numerics/ops.hpp"

namespace sambamixer::model {
namespace {

Tensor uniform(numerics::Shape shape, Real bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<Real> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (Real& v : t.data()) v = dist(rng);
  return t;
}

Real fan_in_bound(std::size_t fan_in) { return Real{1} / std::sqrt(static_cast<Real>(fan_in)); }

}  // namespace

SambaMixerModel::SambaMixerModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const std::size_t d = config_.d_model;
  proj_w_ = &params_.add("embed.proj.weight", uniform({3, d}, fan_in_bound(3), rng));
  proj_b_ = &params_.add("embed.proj.bias", uniform({d}, fan_in_bound(3), rng));
  if (config_.cls_mode != ClsMode::kNone) {
    std::normal_distribution<Real> gauss(0, Real{0.02});
    Tensor cls({1, d});
    for (Real& v : cls.data()) v = gauss(rng);
    cls_ = &params_.add("embed.cls_token", std::move(cls));
  }
  mixer::EncoderConfig enc;
  enc.num_layers = config_.num_layers;
  enc.d_model = d;
  enc.d_state = config_.d_state;
  enc.seq_len = config_.token_count();
  enc.expansion_factor = config_.expansion_factor;
  enc.conv_width = config_.conv_width;
  enc.backbone = config_.backbone;
  encoder_ = mixer::Encoder(params_, "encoder", enc, rng);

  const std::size_t hidden = d / 2;
  head_w1_ = &params_.add("head.fc1.weight", uniform({d, hidden}, fan_in_bound(d), rng));
  head_b1_ = &params_.add("head.fc1.bias", uniform({hidden}, fan_in_bound(d), rng));
  head_w2_ = &params_.add("head.fc2.weight", uniform({hidden, 1}, fan_in_bound(hidden), rng));
  head_b2_ = &params_.add("head.fc2.bias", Tensor::zeros({1}));
}

Var SambaMixerModel::forward(Tape& tape, const dataset::ResampledCycle& cycle, const mixer::DropPath& drop) const {
  const Tensor& raw = cycle.signals;
  if (raw.rank() != 2 || raw.dim(1) != 4 || raw.dim(0) != config_.num_samples)
    throw DimensionError("model expects [" + std::to_string(config_.num_samples) + " x 4] input, got " +
                         numerics::shape_string(raw.shape()));
  const std::size_t len = raw.dim(0);
  Tensor signals = raw;
  norm_.apply(signals);
  Tensor ivt({len, 3});
  std::vector<Real> times(len);
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t ch = 0; ch < 3; ++ch) ivt.at(t, ch) = signals.at(t, ch);
    times[t] = raw.at(t, dataset::kSampleTime);
  }

  const Var projected = input_projection(tape.constant(std::move(ivt)), tape.param(*proj_w_), tape.param(*proj_b_));
  const Tensor pe = positional_embedding(times, cycle.delta_t_hours, config_.d_model, config_.pe_mode);
  const Var tokens = assemble_tokens(projected, pe, cls_ ? tape.param(*cls_) : Var{}, config_.cls_mode);
  const Var encoded = encoder_.forward(tape, tokens, drop);
  const Var pooled = pool_tokens(encoded, config_.cls_mode, len);
  return regression_head(pooled, tape.param(*head_w1_), tape.param(*head_b1_), tape.param(*head_w2_),
                         tape.param(*head_b2_));
}

Real SambaMixerModel::predict(const dataset::ResampledCycle& cycle) const {
  Tape tape;
  return forward(tape, cycle).value().item();
}

std::vector<Real> SambaMixerModel::predict(const std::vector<dataset::ResampledCycle>& cycles) const {
  std::vector<Real> out;
  out.reserve(cycles.size());
  for (const auto& c : cycles) out.push_back(predict(c));
  return out;
}

}  // namespace sambamixer::model
