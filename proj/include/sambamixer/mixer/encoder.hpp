// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sambamixer/mixer/mamba_block.hpp"

namespace sambamixer::mixer {

enum class Backbone {
  kSambaMixer,    // time mixer + bidirectional channel mixer + weighted skips
  kVanillaMamba,  // plain stack of forward Mamba blocks
};

struct EncoderConfig {
  std::size_t num_layers{1};
  std::size_t d_model{0};
  std::size_t d_state{16};
  std::size_t seq_len{0};  // tokens per sequence, including any CLS token
  std::size_t expansion_factor{2};
  std::size_t conv_width{4};
  Backbone backbone{Backbone::kSambaMixer};
};

// One encoder block m (1-based). The time mixer sees [L x d_model]; the channel mixer
// sees the transpose [d_model x L], i.e. a sequence over features of width L.
struct MixerBlock {
  std::size_t index{1};
  MambaBlock time_mixer;
  std::optional<MambaBlock> channel_mixer;
  // Weighted-skip coefficients: alpha, beta, gamma have `index` entries, theta index + 1.
  Parameter* alpha{nullptr};
  Parameter* beta{nullptr};
  Parameter* theta{nullptr};
  Parameter* gamma{nullptr};
};

// Outputs of blocks 0..m; entry 0 of both lists is the encoder input.
struct EncoderState {
  std::vector<Var> y_token;
  std::vector<Var> y_channel;
};

// x_token^(m) = sum_{i<m} alpha^(i) y_token^(i) + sum_{i<m} beta^(i) y_channel^(i)
Var weighted_token_input(Tape& tape, const MixerBlock& block, const EncoderState& state);
// x_channel^(m) = sum_{i<=m} theta^(i) y_token^(i) + sum_{i<m} gamma^(i) y_channel^(i)
Var weighted_channel_input(Tape& tape, const MixerBlock& block, const EncoderState& state);

struct DropPath {
  double rate{0.0};
  bool training{false};
  std::mt19937_64* rng{nullptr};
};

class Encoder {
 public:
  Encoder() = default;
  Encoder(ParameterSet& params, const std::string& prefix, const EncoderConfig& config, std::mt19937_64& rng);

  // [L x d_model] -> [L x d_model]. In training mode every block is skipped with
  // probability drop.rate (outputs become its weighted inputs). NumericErrors are
  // rethrown prefixed with the failing block.
  Var forward(Tape& tape, Var x_embed, const DropPath& drop = {}) const;

  const EncoderConfig& config() const noexcept { return config_; }
  const std::vector<MixerBlock>& blocks() const noexcept { return blocks_; }

 private:
  EncoderConfig config_{};
  std::vector<MixerBlock> blocks_;
};

}  // namespace sambamixer::mixer
