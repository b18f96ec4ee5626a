// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>

#include "sambamixer/model/config.hpp"

namespace sambamixer::model {

inline constexpr Real kPositionalBase = 10000;

// Per-token affine map [L x 3] -> [L x d_model] with weight [3 x d_model], bias [d_model].
// Throws DimensionError unless the signals have exactly 3 channels.
Var input_projection(Var signals, Var weight, Var bias);

// Sinusoidal table over the sample times, plus (for kSampleTimeAndCycleDiff) the same
// encoding of the hours since the previous cycle added to every row:
//   PE[p, 2i] = sin(s_p / base^(2i/d)) [+ sin(dt / base^(2i/d))], odd columns with cos.
// kNone gives zeros. Throws ConfigError for odd d_model.
Tensor positional_embedding(std::span<const Real> sample_times, Real delta_t_hours, std::size_t d_model,
                            PeMode mode = PeMode::kSampleTimeAndCycleDiff);

// Insertion row of the CLS token among L signal tokens: 0, floor(L/2) or L.
std::size_t cls_index(ClsMode mode, std::size_t num_samples);

// proj + pe, with the CLS row [1 x d_model] spliced in unless mode is kNone.
Var assemble_tokens(Var projected, const Tensor& pe, Var cls_token, ClsMode mode);

// CLS row, or the mean over all rows for kNone -> [1 x d_model].
Var pool_tokens(Var encoded, ClsMode mode, std::size_t num_samples);

// [1 x d] -> SiLU(x W1 + b1) W2 + b2 -> [1 x 1].
Var regression_head(Var pooled, Var w1, Var b1, Var w2, Var b2);

}  // namespace sambamixer::model
