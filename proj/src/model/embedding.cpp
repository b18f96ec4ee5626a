// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/model/embedding.hpp"

#include <cmath>

#include "sambamixer/error.hpp"
#include "sambamixer/numerics/ops.hpp"

namespace sambamixer::model {

namespace ops = numerics;

Var input_projection(Var signals, Var weight, Var bias) {
  const Tensor& s = signals.value();
  if (s.rank() != 2 || s.dim(1) != 3)
    throw DimensionError("input_projection: expected [L x 3] signals, got " + numerics::shape_string(s.shape()));
  return ops::linear(signals, weight, bias);
}

Tensor positional_embedding(std::span<const Real> sample_times, Real delta_t_hours, std::size_t d_model,
                            PeMode mode) {
  if (d_model == 0 || d_model % 2 != 0)
    throw ConfigError("positional_embedding: d_model must be even, got " + std::to_string(d_model));
  const std::size_t len = sample_times.size();
  Tensor pe = Tensor::zeros({len, d_model});
  if (mode == PeMode::kNone) return pe;
  for (std::size_t i = 0; i < d_model / 2; ++i) {
    const Real freq =
        std::pow(kPositionalBase, -static_cast<Real>(2 * i) / static_cast<Real>(d_model));
    Real diff_sin = 0, diff_cos = 0;
    if (mode == PeMode::kSampleTimeAndCycleDiff) {
      diff_sin = std::sin(delta_t_hours * freq);
      diff_cos = std::cos(delta_t_hours * freq);
    }
    for (std::size_t p = 0; p < len; ++p) {
      pe.at(p, 2 * i) = std::sin(sample_times[p] * freq) + diff_sin;
      pe.at(p, 2 * i + 1) = std::cos(sample_times[p] * freq) + diff_cos;
    }
  }
  return pe;
}

std::size_t cls_index(ClsMode mode, std::size_t num_samples) {
  switch (mode) {
    case ClsMode::kHead: return 0;
    case ClsMode::kMiddle: return num_samples / 2;
    case ClsMode::kTail: return num_samples;
    case ClsMode::kNone: break;
  }
  throw std::logic_error("cls_index: no CLS token in mode none");
}

Var assemble_tokens(Var projected, const Tensor& pe, Var cls_token, ClsMode mode) {
  if (!numerics::same_shape(projected.value(), pe))
    throw DimensionError("assemble_tokens: projection " + numerics::shape_string(projected.shape()) +
                         " vs positional table " + numerics::shape_string(pe.shape()));
  Tape& tape = projected.tape();
  Var tokens = ops::add(projected, tape.constant(pe));
  if (mode == ClsMode::kNone) return tokens;
  const std::size_t len = pe.dim(0);
  const std::size_t at = cls_index(mode, len);
  std::vector<Var> parts;
  if (at > 0) parts.push_back(ops::slice_rows(tokens, 0, at));
  parts.push_back(cls_token);
  if (at < len) parts.push_back(ops::slice_rows(tokens, at, len));
  return ops::concat_rows(parts);
}

Var pool_tokens(Var encoded, ClsMode mode, std::size_t num_samples) {
  if (mode == ClsMode::kNone) return ops::mean_rows(encoded);
  const std::size_t at = cls_index(mode, num_samples);
  return ops::slice_rows(encoded, at, at + 1);
}

Var regression_head(Var pooled, Var w1, Var b1, Var w2, Var b2) {
  return ops::linear(ops::silu(ops::linear(pooled, w1, b1)), w2, b2);
}

}  // namespace sambamixer::model
