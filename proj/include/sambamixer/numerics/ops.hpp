// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "sambamixer/numerics/autodiff.hpp"

namespace sambamixer::numerics {

// Scalar activations shared by the tape ops and the fused kernels.
inline Real sigmoid(Real x) {
  if (x >= 0) {
    const Real z = std::exp(-x);
    return Real{1} / (Real{1} + z);
  }
  const Real z = std::exp(x);
  return z / (Real{1} + z);
}
inline Real softplus(Real x) { return std::max(x, Real{0}) + std::log1p(std::exp(-std::abs(x))); }
inline Real silu(Real x) { return x * sigmoid(x); }
inline Real silu_grad(Real x) {
  const Real s = sigmoid(x);
  return s * (Real{1} + x * (Real{1} - s));
}

enum class UnaryOp { kExp, kSoftplus, kSilu, kSigmoid, kSquare, kNeg };
enum class BinaryOp { kAdd, kSub, kMul };

Var unary(UnaryOp op, Var a);
// Elementwise with numpy-style broadcasting; gradients are reduced over broadcast axes.
Var binary(BinaryOp op, Var a, Var b);

inline Var exp(Var a) { return unary(UnaryOp::kExp, a); }
inline Var softplus(Var a) { return unary(UnaryOp::kSoftplus, a); }
inline Var silu(Var a) { return unary(UnaryOp::kSilu, a); }
inline Var sigmoid(Var a) { return unary(UnaryOp::kSigmoid, a); }
inline Var square(Var a) { return unary(UnaryOp::kSquare, a); }
inline Var neg(Var a) { return unary(UnaryOp::kNeg, a); }
inline Var add(Var a, Var b) { return binary(BinaryOp::kAdd, a, b); }
inline Var sub(Var a, Var b) { return binary(BinaryOp::kSub, a, b); }
inline Var mul(Var a, Var b) { return binary(BinaryOp::kMul, a, b); }

Var scale(Var a, Real factor);
Var add_scalar(Var a, Real offset);

Var matmul(Var a, Var b);
// x[rows x in] * w[in x out] (+ bias[out] broadcast over rows).
Var linear(Var x, Var weight);
Var linear(Var x, Var weight, Var bias);
Var transpose(Var a);
Var reshape(Var a, Shape shape);

Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var concat_rows(const std::vector<Var>& parts);
Var reverse_rows(Var a);

Var sum(Var a);
Var mean(Var a);
// Column means of a matrix: [rows x cols] -> [1 x cols].
Var mean_rows(Var a);

// sum_i weights[i] * terms[i]; all terms share one shape, weights is a vector of terms.size().
Var weighted_sum(const std::vector<Var>& terms, Var weights);
// Same, but only weights[offset .. offset + terms.size()) are used.
Var weighted_sum(const std::vector<Var>& terms, Var weights, std::size_t offset);

// Row-wise x / sqrt(mean(x^2) + eps) * weight.
Var rms_norm(Var x, Var weight, Real eps = Real{1e-5});

// y[t, e] = bias[e] + sum_k weight[e, k] * x[t - (K-1) + k, e], zero left padding.
Var causal_depthwise_conv(Var x, Var weight, Var bias);

}  // namespace sambamixer::numerics
