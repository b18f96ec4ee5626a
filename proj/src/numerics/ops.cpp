// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/numerics/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sambamixer/error.hpp"

namespace sambamixer::numerics {

namespace {

using RowMajor = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap as_matrix(const Tensor& t) { return ConstMap(t.data().data(), t.dim(0), t.dim(1)); }
MutMap as_matrix(Tensor& t) { return MutMap(t.data().data(), t.dim(0), t.dim(1)); }

void require_matrix(const Var& v, const char* op) {
  if (v.value().rank() != 2) {
    throw DimensionError(std::string(op) + " expects a matrix, got " + shape_string(v.shape()));
  }
}

Real unary_value(UnaryOp op, Real x) {
  switch (op) {
    case UnaryOp::kExp: return std::exp(x);
    case UnaryOp::kSoftplus: return softplus(x);
    case UnaryOp::kSilu: return silu(x);
    case UnaryOp::kSigmoid: return sigmoid(x);
    case UnaryOp::kSquare: return x * x;
    case UnaryOp::kNeg: return -x;
  }
  return x;
}

// d op(x) / dx, given input x and output y.
Real unary_derivative(UnaryOp op, Real x, Real y) {
  switch (op) {
    case UnaryOp::kExp: return y;
    case UnaryOp::kSoftplus: return sigmoid(x);
    case UnaryOp::kSilu: return silu_grad(x);
    case UnaryOp::kSigmoid: return y * (Real{1} - y);
    case UnaryOp::kSquare: return Real{2} * x;
    case UnaryOp::kNeg: return Real{-1};
  }
  return Real{0};
}

// Strided view of one operand inside a broadcast iteration space.
struct Broadcast {
  Shape out_shape;
  std::vector<std::size_t> stride_a;
  std::vector<std::size_t> stride_b;
};

Broadcast broadcast_shapes(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Broadcast bc;
  bc.out_shape.assign(rank, 1);
  bc.stride_a.assign(rank, 0);
  bc.stride_b.assign(rank, 0);
  std::size_t sa = 1, sb = 1;
  for (std::size_t k = 0; k < rank; ++k) {
    const std::size_t d = rank - 1 - k;
    const std::size_t da = k < a.size() ? a[a.size() - 1 - k] : 1;
    const std::size_t db = k < b.size() ? b[b.size() - 1 - k] : 1;
    if (da != db && da != 1 && db != 1) {
      throw DimensionError("shapes " + shape_string(a) + " and " + shape_string(b) + " are not broadcastable");
    }
    bc.out_shape[d] = std::max(da, db);
    bc.stride_a[d] = da == 1 ? 0 : sa;
    bc.stride_b[d] = db == 1 ? 0 : sb;
    sa *= da;
    sb *= db;
  }
  return bc;
}

// Calls fn(out_index, a_index, b_index) for every element of the broadcast output.
template <typename Fn>
void for_each_broadcast(const Broadcast& bc, Fn&& fn) {
  const std::size_t rank = bc.out_shape.size();
  const std::size_t total = shape_size(bc.out_shape);
  std::vector<std::size_t> idx(rank, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t o = 0; o < total; ++o) {
    fn(o, ia, ib);
    for (std::size_t d = rank; d-- > 0;) {
      ++idx[d];
      ia += bc.stride_a[d];
      ib += bc.stride_b[d];
      if (idx[d] < bc.out_shape[d]) break;
      ia -= bc.stride_a[d] * idx[d];
      ib -= bc.stride_b[d] * idx[d];
      idx[d] = 0;
    }
  }
}

}  // namespace

Var unary(UnaryOp op, Var a) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = unary_value(op, x[i]);
  const std::size_t ia = a.id();
  Tape& tape = a.tape();
  const std::size_t out_id = tape.size();
  return tape.record(std::move(y), {a}, [op, ia, out_id](Tape& t, const Tensor& g) {
    const Tensor& xv = t.value(ia);
    const Tensor& yv = t.value(out_id);
    Tensor ga(xv.shape());
    for (std::size_t i = 0; i < xv.size(); ++i) ga[i] = g[i] * unary_derivative(op, xv[i], yv[i]);
    t.accumulate(ia, ga);
  });
}

Var binary(BinaryOp op, Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tape& tape = a.tape();
  const std::size_t ia = a.id(), ib = b.id();

  if (av.shape() == bv.shape()) {
    Tensor y(av.shape());
    for (std::size_t i = 0; i < y.size(); ++i) {
      switch (op) {
        case BinaryOp::kAdd: y[i] = av[i] + bv[i]; break;
        case BinaryOp::kSub: y[i] = av[i] - bv[i]; break;
        case BinaryOp::kMul: y[i] = av[i] * bv[i]; break;
      }
    }
    return tape.record(std::move(y), {a, b}, [op, ia, ib](Tape& t, const Tensor& g) {
      switch (op) {
        case BinaryOp::kAdd:
          t.accumulate(ia, g);
          t.accumulate(ib, g);
          break;
        case BinaryOp::kSub: {
          t.accumulate(ia, g);
          if (t.requires_grad(ib)) {
            Tensor gb = g;
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] = -gb[i];
            t.accumulate(ib, gb);
          }
          break;
        }
        case BinaryOp::kMul: {
          const Tensor& x = t.value(ia);
          const Tensor& z = t.value(ib);
          if (t.requires_grad(ia)) {
            Tensor ga(x.shape());
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] = g[i] * z[i];
            t.accumulate(ia, ga);
          }
          if (t.requires_grad(ib)) {
            Tensor gb(z.shape());
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] = g[i] * x[i];
            t.accumulate(ib, gb);
          }
          break;
        }
      }
    });
  }

  Broadcast bc = broadcast_shapes(av.shape(), bv.shape());
  Tensor y(bc.out_shape);
  for_each_broadcast(bc, [&](std::size_t o, std::size_t i, std::size_t j) {
    switch (op) {
      case BinaryOp::kAdd: y[o] = av[i] + bv[j]; break;
      case BinaryOp::kSub: y[o] = av[i] - bv[j]; break;
      case BinaryOp::kMul: y[o] = av[i] * bv[j]; break;
    }
  });
  return tape.record(std::move(y), {a, b}, [op, ia, ib, bc](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(ia);
    const Tensor& z = t.value(ib);
    Tensor ga(x.shape());
    Tensor gb(z.shape());
    for_each_broadcast(bc, [&](std::size_t o, std::size_t i, std::size_t j) {
      switch (op) {
        case BinaryOp::kAdd:
          ga[i] += g[o];
          gb[j] += g[o];
          break;
        case BinaryOp::kSub:
          ga[i] += g[o];
          gb[j] -= g[o];
          break;
        case BinaryOp::kMul:
          ga[i] += g[o] * z[j];
          gb[j] += g[o] * x[i];
          break;
      }
    });
    t.accumulate(ia, ga);
    t.accumulate(ib, gb);
  });
}

Var scale(Var a, Real factor) {
  Tensor y = a.value();
  for (auto& v : y.data()) v *= factor;
  const std::size_t ia = a.id();
  return a.tape().record(std::move(y), {a}, [ia, factor](Tape& t, const Tensor& g) {
    Tensor ga = g;
    for (auto& v : ga.data()) v *= factor;
    t.accumulate(ia, ga);
  });
}

Var add_scalar(Var a, Real offset) {
  Tensor y = a.value();
  for (auto& v : y.data()) v += offset;
  const std::size_t ia = a.id();
  return a.tape().record(std::move(y), {a}, [ia](Tape& t, const Tensor& g) { t.accumulate(ia, g); });
}

Var matmul(Var a, Var b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  Tensor y = numerics::matmul(a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(y), {a, b}, [ia, ib](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(ia);
    const Tensor& w = t.value(ib);
    if (t.requires_grad(ia)) {
      as_matrix(t.grad_buffer(ia)).noalias() += as_matrix(g) * as_matrix(w).transpose();
    }
    if (t.requires_grad(ib)) {
      as_matrix(t.grad_buffer(ib)).noalias() += as_matrix(x).transpose() * as_matrix(g);
    }
  });
}

Var linear(Var x, Var weight) { return matmul(x, weight); }

Var linear(Var x, Var weight, Var bias) {
  if (bias.value().rank() != 1 || bias.value().size() != weight.value().cols()) {
    throw DimensionError("linear: bias shape " + shape_string(bias.shape()) + " does not match weight " +
                         shape_string(weight.shape()));
  }
  return add(matmul(x, weight), bias);
}

Var transpose(Var a) {
  require_matrix(a, "transpose");
  const std::size_t ia = a.id();
  return a.tape().record(numerics::transpose(a.value()), {a},
                         [ia](Tape& t, const Tensor& g) { t.accumulate(ia, numerics::transpose(g)); });
}

Var reshape(Var a, Shape shape) {
  if (shape_size(shape) != a.value().size()) {
    throw DimensionError("reshape " + shape_string(a.shape()) + " -> " + shape_string(shape));
  }
  const std::size_t ia = a.id();
  const Shape original = a.shape();
  return a.tape().record(a.value().reshaped(std::move(shape)), {a}, [ia, original](Tape& t, const Tensor& g) {
    t.accumulate(ia, g.reshaped(original));
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  require_matrix(a, "slice_rows");
  const Tensor& x = a.value();
  if (begin >= end || end > x.dim(0)) throw DimensionError("slice_rows: range out of bounds");
  const std::size_t c = x.dim(1);
  Tensor y({end - begin, c});
  std::copy(x.data().begin() + begin * c, x.data().begin() + end * c, y.data().begin());
  const std::size_t ia = a.id();
  return a.tape().record(std::move(y), {a}, [ia, begin, c](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[begin * c + i] += g[i];
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  require_matrix(a, "slice_cols");
  const Tensor& x = a.value();
  if (begin >= end || end > x.dim(1)) throw DimensionError("slice_cols: range out of bounds");
  const std::size_t r = x.dim(0), c = x.dim(1), w = end - begin;
  Tensor y({r, w});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < w; ++j) y[i * w + j] = x[i * c + begin + j];
  const std::size_t ia = a.id();
  return a.tape().record(std::move(y), {a}, [ia, begin, r, c, w](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < w; ++j) ga[i * c + begin + j] += g[i * w + j];
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t c = parts.front().value().cols();
  std::size_t rows = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    if (p.value().cols() != c) throw DimensionError("concat_rows: column count mismatch");
    offsets.push_back(rows);
    rows += p.value().rows();
    ids.push_back(p.id());
  }
  Tensor y({rows, c});
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& x = parts[k].value();
    std::copy(x.data().begin(), x.data().end(), y.data().begin() + offsets[k] * c);
  }
  return parts.front().tape().record(std::move(y), parts, [ids, offsets, c](Tape& t, const Tensor& g) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!t.requires_grad(ids[k])) continue;
      Tensor& gk = t.grad_buffer(ids[k]);
      const std::size_t base = offsets[k] * c;
      for (std::size_t i = 0; i < gk.size(); ++i) gk[i] += g[base + i];
    }
  });
}

Var reverse_rows(Var a) {
  require_matrix(a, "reverse_rows");
  const Tensor& x = a.value();
  const std::size_t r = x.dim(0), c = x.dim(1);
  Tensor y({r, c});
  for (std::size_t i = 0; i < r; ++i)
    std::copy(x.data().begin() + (r - 1 - i) * c, x.data().begin() + (r - i) * c, y.data().begin() + i * c);
  const std::size_t ia = a.id();
  return a.tape().record(std::move(y), {a}, [ia, r, c](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[(r - 1 - i) * c + j] += g[i * c + j];
  });
}

Var sum(Var a) {
  Real s = 0;
  for (Real v : a.value().data()) s += v;
  const std::size_t ia = a.id();
  return a.tape().record(Tensor::scalar(s), {a}, [ia](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (auto& v : ga.data()) v += g[0];
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw DimensionError("mean of empty tensor");
  return scale(sum(a), Real{1} / static_cast<Real>(n));
}

Var mean_rows(Var a) {
  require_matrix(a, "mean_rows");
  const Tensor& x = a.value();
  const std::size_t r = x.dim(0), c = x.dim(1);
  Tensor y({1, c});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) y[j] += x[i * c + j];
  const Real inv = Real{1} / static_cast<Real>(r);
  for (auto& v : y.data()) v *= inv;
  const std::size_t ia = a.id();
  return a.tape().record(std::move(y), {a}, [ia, r, c, inv](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j] * inv;
  });
}

Var weighted_sum(const std::vector<Var>& terms, Var weights) { return weighted_sum(terms, weights, 0); }

Var weighted_sum(const std::vector<Var>& terms, Var weights, std::size_t offset) {
  if (terms.empty()) throw DimensionError("weighted_sum: no terms");
  const Tensor& w = weights.value();
  if (w.rank() != 1 || offset + terms.size() > w.size()) {
    throw DimensionError("weighted_sum: weight vector of shape " + shape_string(w.shape()) +
                         " cannot cover " + std::to_string(terms.size()) + " terms at offset " +
                         std::to_string(offset));
  }
  const Shape& shape = terms.front().shape();
  Tensor y(shape);
  std::vector<std::size_t> ids;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const Tensor& x = terms[k].value();
    if (x.shape() != shape) throw DimensionError("weighted_sum: term shapes differ");
    const Real wk = w[offset + k];
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += wk * x[i];
    ids.push_back(terms[k].id());
  }
  std::vector<Var> inputs = terms;
  inputs.push_back(weights);
  const std::size_t iw = weights.id();
  return weights.tape().record(std::move(y), inputs, [ids, iw, offset](Tape& t, const Tensor& g) {
    const Tensor& wv = t.value(iw);
    const bool need_w = t.requires_grad(iw);
    Tensor gw(wv.shape());
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const Tensor& x = t.value(ids[k]);
      if (need_w) {
        Real dot = 0;
        for (std::size_t i = 0; i < x.size(); ++i) dot += g[i] * x[i];
        gw[offset + k] = dot;
      }
      if (t.requires_grad(ids[k])) {
        Tensor& gx = t.grad_buffer(ids[k]);
        const Real wk = wv[offset + k];
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += wk * g[i];
      }
    }
    if (need_w) t.accumulate(iw, gw);
  });
}

Var rms_norm(Var x, Var weight, Real eps) {
  require_matrix(x, "rms_norm");
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  const std::size_t r = xv.dim(0), c = xv.dim(1);
  if (wv.size() != c) throw DimensionError("rms_norm: weight length does not match feature count");
  Tensor y({r, c});
  std::vector<Real> inv_rms(r);
  for (std::size_t i = 0; i < r; ++i) {
    Real ms = 0;
    for (std::size_t j = 0; j < c; ++j) ms += xv[i * c + j] * xv[i * c + j];
    ms /= static_cast<Real>(c);
    inv_rms[i] = Real{1} / std::sqrt(ms + eps);
    for (std::size_t j = 0; j < c; ++j) y[i * c + j] = xv[i * c + j] * inv_rms[i] * wv[j];
  }
  const std::size_t ix = x.id(), iw = weight.id();
  return x.tape().record(std::move(y), {x, weight}, [ix, iw, r, c, inv_rms](Tape& t, const Tensor& g) {
    const Tensor& xv2 = t.value(ix);
    const Tensor& wv2 = t.value(iw);
    Tensor gx(xv2.shape());
    Tensor gw(wv2.shape());
    for (std::size_t i = 0; i < r; ++i) {
      const Real s = inv_rms[i];
      Real dot = 0;
      for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * wv2[j] * xv2[i * c + j];
      const Real coef = s * s * s * dot / static_cast<Real>(c);
      for (std::size_t j = 0; j < c; ++j) {
        const Real xij = xv2[i * c + j];
        gx[i * c + j] = s * g[i * c + j] * wv2[j] - xij * coef;
        gw[j] += g[i * c + j] * xij * s;
      }
    }
    t.accumulate(ix, gx);
    t.accumulate(iw, gw);
  });
}

Var causal_depthwise_conv(Var x, Var weight, Var bias) {
  require_matrix(x, "causal_depthwise_conv");
  require_matrix(weight, "causal_depthwise_conv");
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  const Tensor& bv = bias.value();
  const std::size_t len = xv.dim(0), ch = xv.dim(1), width = wv.dim(1);
  if (wv.dim(0) != ch || bv.size() != ch) {
    throw DimensionError("causal_depthwise_conv: weight " + shape_string(wv.shape()) + " / bias " +
                         shape_string(bv.shape()) + " do not match " + std::to_string(ch) + " channels");
  }
  Tensor y({len, ch});
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t e = 0; e < ch; ++e) {
      Real acc = bv[e];
      for (std::size_t k = 0; k < width; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(width - 1);
        if (src >= 0) acc += wv[e * width + k] * xv[static_cast<std::size_t>(src) * ch + e];
      }
      y[t * ch + e] = acc;
    }
  }
  const std::size_t ix = x.id(), iw = weight.id(), ib = bias.id();
  return x.tape().record(std::move(y), {x, weight, bias}, [ix, iw, ib, len, ch, width](Tape& t, const Tensor& g) {
    const Tensor& xv2 = t.value(ix);
    const Tensor& wv2 = t.value(iw);
    Tensor gx(xv2.shape());
    Tensor gw(wv2.shape());
    Tensor gb({ch});
    for (std::size_t tt = 0; tt < len; ++tt) {
      for (std::size_t e = 0; e < ch; ++e) {
        const Real go = g[tt * ch + e];
        gb[e] += go;
        for (std::size_t k = 0; k < width; ++k) {
          const std::ptrdiff_t src =
              static_cast<std::ptrdiff_t>(tt + k) - static_cast<std::ptrdiff_t>(width - 1);
          if (src < 0) continue;
          const std::size_t s = static_cast<std::size_t>(src) * ch + e;
          gw[e * width + k] += go * xv2[s];
          gx[s] += go * wv2[e * width + k];
        }
      }
    }
    t.accumulate(ix, gx);
    t.accumulate(iw, gw);
    t.accumulate(ib, gb);
  });
}

}  // namespace sambamixer::numerics
