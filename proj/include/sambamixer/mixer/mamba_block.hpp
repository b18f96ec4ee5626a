// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "sambamixer/ssm/selective_scan.hpp"

namespace sambamixer::mixer {

using numerics::Parameter;
using numerics::ParameterSet;
using numerics::Real;
using numerics::Tape;
using numerics::Var;
using ssm::ScanDirection;

struct MambaConfig {
  std::size_t d_model{0};
  std::size_t d_state{16};
  std::size_t expansion_factor{2};
  std::size_t conv_width{4};

  std::size_t d_inner() const noexcept { return expansion_factor * d_model; }
  std::size_t dt_rank() const noexcept { return (d_model + 15) / 16; }
};

enum class BlockKind { kForward, kBackward, kBidirectional };

// Pre-norm Mamba block with residual:
//   x + out_proj( scan(SiLU(conv(stream))) * SiLU(gate) ),  [stream | gate] = in_proj(RMSNorm(x))
// A bidirectional block shares norm/in_proj/out_proj and sums a forward and a backward
// conv+scan branch before the gate.
class MambaBlock {
 public:
  MambaBlock() = default;
  MambaBlock(ParameterSet& params, const std::string& prefix, const MambaConfig& config, BlockKind kind,
             std::mt19937_64& rng);

  // x: [L x d_model] -> [L x d_model].
  Var forward(Tape& tape, Var x) const;

  const MambaConfig& config() const noexcept { return config_; }
  BlockKind kind() const noexcept { return kind_; }

  struct Branch {
    ScanDirection direction{ScanDirection::kForward};
    Parameter* conv_weight{nullptr};  // [d_inner x conv_width]
    Parameter* conv_bias{nullptr};    // [d_inner]
    ssm::SelectiveSsmLayer ssm;
  };

  Parameter& norm_weight() const { return *norm_weight_; }
  Parameter& in_proj() const { return *in_proj_; }
  Parameter& out_proj() const { return *out_proj_; }
  Parameter& out_bias() const { return *out_bias_; }
  const std::vector<Branch>& branches() const noexcept { return branches_; }

 private:
  Var branch_forward(Tape& tape, const Branch& branch, Var stream) const;

  MambaConfig config_{};
  BlockKind kind_{BlockKind::kForward};
  Parameter* norm_weight_{nullptr};
  Parameter* in_proj_{nullptr};   // [d_model x 2 d_inner]
  Parameter* out_proj_{nullptr};  // [d_inner x d_model]
  Parameter* out_bias_{nullptr};  // [d_model]
  std::vector<Branch> branches_;
};

}  // namespace sambamixer::mixer
