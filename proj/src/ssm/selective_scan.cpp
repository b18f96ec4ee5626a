// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/ssm/selective_scan.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "sambamixer/error.hpp"
#include "sambamixer/numerics/ops.hpp"

namespace sambamixer::ssm {

namespace ops = numerics;

namespace {

void expect_shape(const Tensor& t, std::size_t rows, std::size_t cols, const char* name) {
  if (t.rank() != 2 || t.dim(0) != rows || t.dim(1) != cols) {
    throw DimensionError(std::string("selective_scan: ") + name + " has shape " + numerics::shape_string(t.shape()) +
                         ", expected [" + std::to_string(rows) + ", " + std::to_string(cols) + "]");
  }
}

}  // namespace

Var selective_scan(Var u, Var delta, Var a, Var b, Var c, Var d, ScanDirection direction) {
  const Tensor& uv = u.value();
  if (uv.rank() != 2) throw DimensionError("selective_scan: input must be [L x E]");
  const std::size_t len = uv.dim(0), inner = uv.dim(1);
  const Tensor& av = a.value();
  if (av.rank() != 2 || av.dim(0) != inner) throw DimensionError("selective_scan: A must be [E x N]");
  const std::size_t state = av.dim(1);
  expect_shape(delta.value(), len, inner, "delta");
  expect_shape(b.value(), len, state, "B");
  expect_shape(c.value(), len, state, "C");
  if (d.value().size() != inner) throw DimensionError("selective_scan: D must have E entries");

  const Tensor& dv = delta.value();
  const Tensor& bv = b.value();
  const Tensor& cv = c.value();
  const Tensor& skip = d.value();
  const bool forward = direction == ScanDirection::kForward;

  Tensor y({len, inner});
  // States h_t for every step, laid out [t][e][n]; the backward pass walks them in reverse.
  std::vector<Real> states(len * inner * state);
  std::vector<Real> h(state);
  for (std::size_t e = 0; e < inner; ++e) {
    std::fill(h.begin(), h.end(), Real{0});
    for (std::size_t step = 0; step < len; ++step) {
      const std::size_t t = forward ? step : len - 1 - step;
      const Real dt = dv[t * inner + e];
      const Real x = uv[t * inner + e];
      Real acc = skip[e] * x;
      for (std::size_t n = 0; n < state; ++n) {
        h[n] = std::exp(dt * av[e * state + n]) * h[n] + dt * bv[t * state + n] * x;
        acc += cv[t * state + n] * h[n];
        states[(t * inner + e) * state + n] = h[n];
      }
      y[t * inner + e] = acc;
    }
  }
  for (std::size_t step = 0; step < len; ++step) {
    const std::size_t t = forward ? step : len - 1 - step;
    for (std::size_t e = 0; e < inner; ++e) {
      if (!std::isfinite(y[t * inner + e])) {
        throw NumericError("selective_scan: non-finite output at token " + std::to_string(t));
      }
    }
  }

  const std::size_t iu = u.id(), idl = delta.id(), ia = a.id(), ib = b.id(), ic = c.id(), id = d.id();
  return u.tape().record(
      std::move(y), {u, delta, a, b, c, d},
      [=, states = std::move(states)](Tape& tape, const Tensor& g) {
        const Tensor& uu = tape.value(iu);
        const Tensor& dd = tape.value(idl);
        const Tensor& aa = tape.value(ia);
        const Tensor& bb = tape.value(ib);
        const Tensor& cc = tape.value(ic);
        const Tensor& sk = tape.value(id);
        Tensor gu(uu.shape()), gdelta(dd.shape()), ga(aa.shape()), gb(bb.shape()), gc(cc.shape()), gd(sk.shape());
        std::vector<Real> dh(state);
        for (std::size_t e = 0; e < inner; ++e) {
          std::fill(dh.begin(), dh.end(), Real{0});
          for (std::size_t step = len; step-- > 0;) {
            const std::size_t t = forward ? step : len - 1 - step;
            const bool has_prev = step > 0;
            const std::size_t tp = forward ? t - 1 : t + 1;
            const Real go = g[t * inner + e];
            const Real dt = dd[t * inner + e];
            const Real x = uu[t * inner + e];
            gd[e] += go * x;
            Real gx = go * sk[e];
            Real gdt = 0;
            for (std::size_t n = 0; n < state; ++n) {
              const Real ht = states[(t * inner + e) * state + n];
              gc[t * state + n] += go * ht;
              dh[n] += go * cc[t * state + n];
              const Real an = aa[e * state + n];
              const Real decay = std::exp(dt * an);
              const Real h_prev = has_prev ? states[(tp * inner + e) * state + n] : Real{0};
              // d/d(decay) of decay * h_prev
              const Real g_decay = dh[n] * h_prev * decay;
              gdt += g_decay * an + dh[n] * bb[t * state + n] * x;
              ga[e * state + n] += g_decay * dt;
              gb[t * state + n] += dh[n] * dt * x;
              gx += dh[n] * dt * bb[t * state + n];
              dh[n] *= decay;
            }
            gu[t * inner + e] += gx;
            gdelta[t * inner + e] += gdt;
          }
        }
        tape.accumulate(iu, gu);
        tape.accumulate(idl, gdelta);
        tape.accumulate(ia, ga);
        tape.accumulate(ib, gb);
        tape.accumulate(ic, gc);
        tape.accumulate(id, gd);
      });
}

SelectiveSsmLayer::SelectiveSsmLayer(ParameterSet& params, const std::string& prefix,
                                     const SelectiveSsmConfig& config, std::mt19937_64& rng)
    : config_(config) {
  if (config_.d_inner == 0 || config_.d_state == 0) {
    throw ParameterError("selective SSM needs positive d_inner and d_state");
  }
  if (config_.dt_rank == 0) config_.dt_rank = (config_.d_inner + 31) / 32;
  const std::size_t inner = config_.d_inner, state = config_.d_state, rank = config_.dt_rank;

  auto uniform = [&rng](numerics::Shape shape, Real bound) {
    std::uniform_real_distribution<Real> dist(-bound, bound);
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = dist(rng);
    return t;
  };
  const Real in_bound = Real{1} / std::sqrt(static_cast<Real>(inner));
  w_b_ = &params.add(prefix + ".w_b", uniform({inner, state}, in_bound));
  w_c_ = &params.add(prefix + ".w_c", uniform({inner, state}, in_bound));
  w_delta_down_ = &params.add(prefix + ".w_delta_down", uniform({inner, rank}, in_bound));
  w_delta_up_ = &params.add(prefix + ".w_delta_up", uniform({rank, inner}, Real{1} / std::sqrt(static_cast<Real>(rank))));

  // Step sizes start log-uniform in [dt_min, dt_max]; the bias stores softplus^-1(dt).
  Tensor bias({inner});
  std::uniform_real_distribution<Real> log_dt(std::log(config_.dt_min), std::log(config_.dt_max));
  for (auto& v : bias.data()) {
    const Real dt = std::exp(log_dt(rng));
    v = dt + std::log(-std::expm1(-dt));
  }
  delta_bias_ = &params.add(prefix + ".delta_bias", std::move(bias));

  Tensor a_log({inner, state});
  for (std::size_t e = 0; e < inner; ++e)
    for (std::size_t n = 0; n < state; ++n) a_log[e * state + n] = std::log(static_cast<Real>(n + 1));
  a_log_ = &params.add(prefix + ".a_log", std::move(a_log));
  d_ = &params.add(prefix + ".d", Tensor::ones({inner}));
}

Var SelectiveSsmLayer::forward(Tape& tape, Var u, ScanDirection direction) const {
  const Var b = ops::matmul(u, tape.param(*w_b_));
  const Var c = ops::matmul(u, tape.param(*w_c_));
  const Var dt_low = ops::matmul(u, tape.param(*w_delta_down_));
  const Var delta = ops::softplus(ops::add(ops::matmul(dt_low, tape.param(*w_delta_up_)), tape.param(*delta_bias_)));
  const Var a = ops::neg(ops::exp(tape.param(*a_log_)));
  return selective_scan(u, delta, a, b, c, tape.param(*d_), direction);
}

}  // namespace sambamixer::ssm
