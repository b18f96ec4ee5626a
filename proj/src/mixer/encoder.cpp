// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/mixer/encoder.hpp"

#include <stdexcept>

#include "sambamixer/error.hpp"
#include "sambamixer/numerics/ops.hpp"

namespace sambamixer::mixer {

namespace ops = numerics;
using numerics::Tensor;

namespace {

Tensor one_hot(std::size_t size, std::size_t hot) {
  Tensor t({size});
  t[hot] = Real{1};
  return t;
}

Var combine(Tape& tape, const std::vector<Var>& first, Parameter& first_w, std::size_t first_count,
            const std::vector<Var>& second, Parameter& second_w, std::size_t second_count) {
  std::vector<Var> a(first.begin(), first.begin() + static_cast<std::ptrdiff_t>(first_count));
  std::vector<Var> b(second.begin(), second.begin() + static_cast<std::ptrdiff_t>(second_count));
  return ops::add(ops::weighted_sum(a, tape.param(first_w)), ops::weighted_sum(b, tape.param(second_w)));
}

}  // namespace

Var weighted_token_input(Tape& tape, const MixerBlock& block, const EncoderState& state) {
  const std::size_t m = block.index;
  if (m == 0 || state.y_token.size() != m || state.y_channel.size() != m) {
    throw std::logic_error("weighted_token_input: block " + std::to_string(m) + " needs " + std::to_string(m) +
                           " prior outputs per mixer, have " + std::to_string(state.y_token.size()) + "/" +
                           std::to_string(state.y_channel.size()));
  }
  return combine(tape, state.y_token, *block.alpha, m, state.y_channel, *block.beta, m);
}

Var weighted_channel_input(Tape& tape, const MixerBlock& block, const EncoderState& state) {
  const std::size_t m = block.index;
  if (m == 0 || state.y_token.size() != m + 1 || state.y_channel.size() != m) {
    throw std::logic_error("weighted_channel_input: block " + std::to_string(m) + " needs " +
                           std::to_string(m + 1) + " token and " + std::to_string(m) +
                           " channel outputs, have " + std::to_string(state.y_token.size()) + "/" +
                           std::to_string(state.y_channel.size()));
  }
  return combine(tape, state.y_token, *block.theta, m + 1, state.y_channel, *block.gamma, m);
}

Encoder::Encoder(ParameterSet& params, const std::string& prefix, const EncoderConfig& config, std::mt19937_64& rng)
    : config_(config) {
  if (config_.num_layers == 0) throw ParameterError("encoder needs at least one block");
  if (config_.backbone == Backbone::kSambaMixer && config_.seq_len == 0) {
    throw ParameterError("SambaMixer encoder needs the token count for its channel mixer");
  }
  MambaConfig time_cfg{config_.d_model, config_.d_state, config_.expansion_factor, config_.conv_width};
  MambaConfig channel_cfg{config_.seq_len, config_.d_state, config_.expansion_factor, config_.conv_width};

  blocks_.reserve(config_.num_layers);
  for (std::size_t i = 0; i < config_.num_layers; ++i) {
    const std::size_t m = i + 1;
    const std::string p = prefix + ".blocks." + std::to_string(i);
    MixerBlock block;
    block.index = m;
    block.time_mixer = MambaBlock(params, p + ".time_mixer", time_cfg, BlockKind::kForward, rng);
    if (config_.backbone == Backbone::kSambaMixer) {
      block.channel_mixer = MambaBlock(params, p + ".channel_mixer", channel_cfg, BlockKind::kBidirectional, rng);
      // Start as a plain stack: block m reads block m-1's channel-mixer output and its
      // channel mixer reads its own time-mixer output.
      block.alpha = &params.add(p + ".alpha", m == 1 ? one_hot(m, 0) : Tensor({m}));
      block.beta = &params.add(p + ".beta", m == 1 ? Tensor({m}) : one_hot(m, m - 1));
      block.theta = &params.add(p + ".theta", one_hot(m + 1, m));
      block.gamma = &params.add(p + ".gamma", Tensor({m}));
    }
    blocks_.push_back(std::move(block));
  }
}

Var Encoder::forward(Tape& tape, Var x_embed, const DropPath& drop) const {
  if (drop.rate < 0.0 || drop.rate >= 1.0) throw ParameterError("drop-path rate must lie in [0, 1)");
  if (drop.training && drop.rate > 0.0 && drop.rng == nullptr) {
    throw std::logic_error("drop-path in training mode needs a random generator");
  }
  std::bernoulli_distribution drop_block(drop.rate);
  auto dropped = [&]() { return drop.training && drop.rate > 0.0 && drop_block(*drop.rng); };

  if (config_.backbone == Backbone::kVanillaMamba) {
    Var x = x_embed;
    for (const MixerBlock& block : blocks_) {
      if (dropped()) continue;
      try {
        x = block.time_mixer.forward(tape, x);
      } catch (const NumericError& e) {
        throw NumericError("block " + std::to_string(block.index) + ": " + e.what());
      }
    }
    return x;
  }

  EncoderState state;
  state.y_token.push_back(x_embed);
  state.y_channel.push_back(x_embed);
  for (const MixerBlock& block : blocks_) {
    const bool skip = dropped();
    try {
      const Var x_token = weighted_token_input(tape, block, state);
      state.y_token.push_back(skip ? x_token : block.time_mixer.forward(tape, x_token));
      const Var x_channel = weighted_channel_input(tape, block, state);
      if (skip) {
        state.y_channel.push_back(x_channel);
      } else {
        const Var mixed = block.channel_mixer->forward(tape, ops::transpose(x_channel));
        state.y_channel.push_back(ops::transpose(mixed));
      }
    } catch (const NumericError& e) {
      throw NumericError("block " + std::to_string(block.index) + ": " + e.what());
    }
  }
  return state.y_channel.back();
}

}  // namespace sambamixer::mixer
