// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/ssm/lti.hpp"

#include <cmath>
#include <string>

#include "sambamixer/error.hpp"

namespace sambamixer::ssm {

namespace {

void validate(const DiscreteSsm& ssm) {
  const std::size_t n = ssm.a_bar.size();
  if (ssm.b_bar.size() != n || ssm.c.size() != n) {
    throw DimensionError("discrete SSM: a_bar/b_bar/c lengths disagree");
  }
}

}  // namespace

DiscreteSsm discretize_zoh(const LtiSsm& ssm) {
  if (!(ssm.delta > 0)) throw ParameterError("discretize_zoh: step size must be positive");
  const std::size_t n = ssm.a.size();
  if (ssm.b.size() != n || ssm.c.size() != n) throw DimensionError("LTI SSM: a/b/c lengths disagree");

  DiscreteSsm out;
  out.a_bar.resize(n);
  out.b_bar.resize(n);
  out.c = ssm.c;
  out.d = ssm.d;
  out.skip = ssm.skip;
  for (std::size_t i = 0; i < n; ++i) {
    const Real z = ssm.delta * ssm.a[i];
    out.a_bar[i] = std::exp(z);
    if (std::abs(z) < kZohSmallArgument) {
      // (e^z - 1)/z = 1 + z/2 + z^2/6 + O(z^3)
      out.b_bar[i] = ssm.delta * ssm.b[i] * (Real{1} + z / 2 + z * z / 6);
    } else {
      out.b_bar[i] = std::expm1(z) / z * ssm.delta * ssm.b[i];
    }
  }
  return out;
}

std::vector<Real> scan_recurrent(const DiscreteSsm& ssm, std::span<const Real> x) {
  validate(ssm);
  const std::size_t n = ssm.state_size();
  std::vector<Real> h(n, Real{0});
  std::vector<Real> y(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    Real acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = ssm.a_bar[i] * h[i] + ssm.b_bar[i] * x[t];
      acc += ssm.c[i] * h[i];
    }
    y[t] = ssm.skip ? acc + ssm.d * x[t] : acc;
  }
  return y;
}

std::vector<Real> build_kernel(const DiscreteSsm& ssm, int length) {
  if (length <= 0) throw ParameterError("build_kernel: length must be positive, got " + std::to_string(length));
  validate(ssm);
  const std::size_t n = ssm.state_size();
  std::vector<Real> kernel(static_cast<std::size_t>(length));
  std::vector<Real> power(ssm.b_bar);  // a_bar^j b_bar
  for (std::size_t j = 0; j < kernel.size(); ++j) {
    Real acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += ssm.c[i] * power[i];
      power[i] *= ssm.a_bar[i];
    }
    kernel[j] = acc;
  }
  return kernel;
}

std::vector<Real> scan_convolutional(const DiscreteSsm& ssm, std::span<const Real> x) {
  if (x.empty()) return {};
  const std::vector<Real> kernel = build_kernel(ssm, static_cast<int>(x.size()));
  std::vector<Real> y(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    Real acc = 0;
    for (std::size_t j = 0; j <= t; ++j) acc += kernel[j] * x[t - j];
    y[t] = ssm.skip ? acc + ssm.d * x[t] : acc;
  }
  return y;
}

}  // namespace sambamixer::ssm
