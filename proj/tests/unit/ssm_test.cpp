// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "sambamixer/error.hpp"
#include "sambamixer/numerics/grad_check.hpp"
#include "sambamixer/numerics/ops.hpp"
#include "sambamixer/ssm/lti.hpp"
#include "sambamixer/ssm/selective_scan.hpp"
#include "test_support.hpp"

namespace sambamixer::ssm {
namespace {

using testing::random_tensor;

// exp([[da, db], [0, 0]]) = [[a_bar, b_bar], [0, 1]].
std::pair<double, double> augmented_expm(double a, double b, double delta) {
  Eigen::Matrix2d m;
  m << delta * a, delta * b, 0, 0;
  const Eigen::Matrix2d e = m.exp();
  return {e(0, 0), e(0, 1)};
}

DiscreteSsm scalar_discrete(Real a_bar, Real b_bar, Real c) { return DiscreteSsm{{a_bar}, {b_bar}, {c}, 0, false}; }

GTEST_TEST(ZohTest, ZeroStateMatrixLimit) {
  const DiscreteSsm d = discretize_zoh({{0}, {1}, {1}, 0, 0.5, false});
  EXPECT_EQ(d.a_bar[0], 1.0);
  EXPECT_EQ(d.b_bar[0], 0.5);
}

GTEST_TEST(ZohTest, ScalarClosedForm) {
  const DiscreteSsm d = discretize_zoh({{-1}, {2}, {1}, 0, 0.1, false});
  EXPECT_NEAR(d.a_bar[0], std::exp(-0.1), 1e-15);
  EXPECT_NEAR(d.b_bar[0], (-10.0) * (std::exp(-0.1) - 1) * 0.2, 1e-15);
}

GTEST_TEST(ZohTest, DiagonalMatchesMatrixExponential) {
  const DiscreteSsm d = discretize_zoh({{-1, -2}, {1, 1}, {1, 1}, 0, 0.2, false});
  for (std::size_t i = 0; i < 2; ++i) {
    const auto [a_bar, b_bar] = augmented_expm(i == 0 ? -1 : -2, 1, 0.2);
    EXPECT_NEAR(d.a_bar[i], a_bar, 1e-12 * std::abs(a_bar));
    EXPECT_NEAR(d.b_bar[i], b_bar, 1e-12 * std::abs(b_bar));
  }
}

GTEST_TEST(ZohTest, SmallArgumentBranch) {
  for (double a : {-1e-9, 3e-10, -5e-12}) {
    const DiscreteSsm d = discretize_zoh({{Real(a)}, {1.5}, {1}, 0, 0.7, false});
    const auto [a_bar, b_bar] = augmented_expm(a, 1.5, 0.7);
    EXPECT_NEAR(d.b_bar[0], b_bar, 1e-12 * std::abs(b_bar));
    EXPECT_NEAR(d.a_bar[0], a_bar, 1e-12 * std::abs(a_bar));
  }
}

GTEST_TEST(ZohTest, RejectsBadInput) {
  EXPECT_THROW(discretize_zoh({{-1}, {1}, {1}, 0, 0.0, false}), ParameterError);
  EXPECT_THROW(discretize_zoh({{-1}, {1}, {1}, 0, -1.0, false}), ParameterError);
  EXPECT_THROW(discretize_zoh({{-1, -2}, {1}, {1}, 0, 1.0, false}), DimensionError);
}

GTEST_TEST(ZohTest, FirstOrderLimitIsSecondOrderAccurate) {
  const double a = -1.7;
  auto err = [&](double delta) {
    return std::abs(discretize_zoh({{Real(a)}, {1}, {1}, 0, Real(delta), false}).a_bar[0] - (1 + delta * a));
  };
  const double ratio = err(1e-2) / err(1e-3);
  EXPECT_GT(ratio, 80.0);
  EXPECT_LT(ratio, 120.0);
}

GTEST_TEST(RecurrenceTest, MemorylessAndGeometric) {
  const std::vector<Real> impulse3{1, 0, 0};
  EXPECT_EQ(scan_recurrent(scalar_discrete(0, 1, 2), impulse3), (std::vector<Real>{2, 0, 0}));
  const std::vector<Real> impulse4{1, 0, 0, 0};
  EXPECT_EQ(scan_recurrent(scalar_discrete(0.5, 1, 1), impulse4), (std::vector<Real>{1, 0.5, 0.25, 0.125}));
}

GTEST_TEST(RecurrenceTest, SkipTerm) {
  DiscreteSsm s = scalar_discrete(0.5, 1, 1);
  s.d = 3;
  s.skip = true;
  const std::vector<Real> x{1, 0};
  EXPECT_EQ(scan_recurrent(s, x), (std::vector<Real>{4, 0.5}));
  EXPECT_EQ(scan_convolutional(s, x), (std::vector<Real>{4, 0.5}));
}

GTEST_TEST(KernelTest, Expansion) {
  EXPECT_EQ(build_kernel(scalar_discrete(0.5, 1, 2), 3), (std::vector<Real>{2, 1, 0.5}));
  EXPECT_EQ(build_kernel(scalar_discrete(0.5, 1, 0), 3), (std::vector<Real>{0, 0, 0}));
  EXPECT_EQ(build_kernel(scalar_discrete(1, 1, 1), 4), (std::vector<Real>{1, 1, 1, 1}));
  EXPECT_THROW(build_kernel(scalar_discrete(1, 1, 1), 0), ParameterError);
}

GTEST_TEST(ConvolutionTest, ImpulseAndZeros) {
  const DiscreteSsm s = discretize_zoh({{-0.3, -1.1}, {1, 2}, {0.5, -1}, 0, 0.4, false});
  std::vector<Real> impulse(6, 0);
  impulse[0] = 1;
  const auto y = scan_convolutional(s, impulse);
  const auto k = build_kernel(s, 6);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(y[i], k[i], 1e-15);
  const std::vector<Real> zeros(6, 0);
  for (Real v : scan_convolutional(s, zeros)) EXPECT_EQ(v, 0);
}

GTEST_TEST(DualityTest, RandomStableSystems) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0, 1), sym(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 8;
    LtiSsm s;
    for (std::size_t i = 0; i < n; ++i) {
      s.a.push_back(-(0.01 + 3 * unit(rng)));
      s.b.push_back(sym(rng));
      s.c.push_back(sym(rng));
    }
    s.delta = 0.01 + unit(rng);
    s.d = sym(rng);
    s.skip = trial % 2 == 0;
    const int len = trial % 3 == 0 ? 32 : 64;
    std::vector<Real> x(static_cast<std::size_t>(len));
    for (Real& v : x) v = sym(rng);
    const DiscreteSsm d = discretize_zoh(s);
    const auto r = scan_recurrent(d, x), c = scan_convolutional(d, x);
    for (int t = 0; t < len; ++t) EXPECT_NEAR(r[t], c[t], 1e-9);
  }
}

class SelectiveScanTest : public ::testing::Test {
 protected:
  static constexpr std::size_t kLen = 6, kInner = 4, kState = 3;
  std::mt19937_64 rng{7};
};

TEST_F(SelectiveScanTest, ZeroSelectionIsPureSkip) {
  ParameterSet params;
  SelectiveSsmLayer layer(params, "ssm", {kInner, kState, 0}, rng);
  layer.w_b().value.fill(0);
  layer.w_c().value.fill(0);
  layer.d().value = random_tensor({kInner}, rng);
  Tape tape;
  const Tensor x = random_tensor({kLen, kInner}, rng);
  const Tensor y = layer.forward(tape, tape.constant(x), ScanDirection::kForward).value();
  for (std::size_t t = 0; t < kLen; ++t)
    for (std::size_t e = 0; e < kInner; ++e) EXPECT_NEAR(y.at(t, e), layer.d().value[e] * x.at(t, e), 1e-15);
}

TEST_F(SelectiveScanTest, ConstantProjectionsReduceToLti) {
  const std::size_t len = 12;
  const Real step = 0.3;
  const std::vector<Real> a_row{-0.5, -1.0, -2.0};
  const std::vector<Real> b_row{1.0, -0.5, 0.25};
  const std::vector<Real> c_row{0.3, 0.7, -1.1};
  Tensor u = random_tensor({len, 2}, rng);
  Tensor delta({len, 2}, step), a({2, kState}), b({len, kState}), c({len, kState}), d({2}, 0.4);
  for (std::size_t n = 0; n < kState; ++n) {
    a.at(0, n) = a.at(1, n) = a_row[n];
    for (std::size_t t = 0; t < len; ++t) {
      b.at(t, n) = b_row[n];
      c.at(t, n) = c_row[n];
    }
  }
  Tape tape;
  const Tensor y = selective_scan(tape.constant(u), tape.constant(delta), tape.constant(a), tape.constant(b),
                                  tape.constant(c), tape.constant(d), ScanDirection::kForward)
                       .value();
  DiscreteSsm lti;
  for (std::size_t n = 0; n < kState; ++n) {
    lti.a_bar.push_back(std::exp(step * a_row[n]));
    lti.b_bar.push_back(step * b_row[n]);
  }
  lti.c = c_row;
  lti.d = 0.4;
  lti.skip = true;
  for (std::size_t e = 0; e < 2; ++e) {
    std::vector<Real> x(len);
    for (std::size_t t = 0; t < len; ++t) x[t] = u.at(t, e);
    const auto ref = scan_recurrent(lti, x);
    for (std::size_t t = 0; t < len; ++t) EXPECT_NEAR(y.at(t, e), ref[t], 1e-9);
  }
}

TEST_F(SelectiveScanTest, BackwardEqualsReversedForward) {
  ParameterSet params;
  SelectiveSsmLayer layer(params, "ssm", {kInner, kState, 0}, rng);
  const Tensor x = random_tensor({kLen, kInner}, rng);
  Tape tape;
  const Var xv = tape.constant(x);
  const Tensor bwd = layer.forward(tape, xv, ScanDirection::kBackward).value();
  const Tensor fwd_rev =
      numerics::reverse_rows(layer.forward(tape, numerics::reverse_rows(xv), ScanDirection::kForward)).value();
  EXPECT_EQ(bwd.values(), fwd_rev.values());
}

TEST_F(SelectiveScanTest, ForwardIsCausal) {
  ParameterSet params;
  SelectiveSsmLayer layer(params, "ssm", {kInner, kState, 0}, rng);
  Tensor x = random_tensor({kLen, kInner}, rng);
  Tape tape;
  const Tensor y0 = layer.forward(tape, tape.constant(x), ScanDirection::kForward).value();
  x.at(4, 1) += 0.5;
  const Tensor y1 = layer.forward(tape, tape.constant(x), ScanDirection::kForward).value();
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t e = 0; e < kInner; ++e) EXPECT_EQ(y0.at(t, e), y1.at(t, e));
}

TEST_F(SelectiveScanTest, StepSizesPositive) {
  ParameterSet params;
  SelectiveSsmLayer layer(params, "ssm", {kInner, kState, 0}, rng);
  for (Real v : layer.delta_bias().value.data()) {
    const Real dt = numerics::softplus(v);
    EXPECT_GE(dt, 1e-3 * (1 - 1e-9));
    EXPECT_LE(dt, 1e-1 * (1 + 1e-9));
  }
  for (Real v : layer.a_log().value.data()) EXPECT_LT(-std::exp(v), 0);
}

TEST_F(SelectiveScanTest, GradientCheck) {
  ParameterSet params;
  SelectiveSsmLayer layer(params, "ssm", {kInner, kState, 0}, rng);
  Parameter& input = params.add("input", random_tensor({kLen, kInner}, rng));
  const Tensor weights = random_tensor({kLen, kInner}, rng);
  for (ScanDirection dir : {ScanDirection::kForward, ScanDirection::kBackward}) {
    auto f = [&](Tape& tape) {
      const Var y = layer.forward(tape, tape.param(input), dir);
      return numerics::sum(numerics::mul(y, tape.constant(weights)));
    };
    const auto r = numerics::grad_check(f, params.pointers(), 1e-5);
    EXPECT_LT(r.max_relative_error, 1e-3) << r.worst_parameter;
  }
}

TEST_F(SelectiveScanTest, NonFiniteNamesToken) {
  ParameterSet params;
  SelectiveSsmLayer layer(params, "ssm", {kInner, kState, 0}, rng);
  Tensor x = random_tensor({kLen, kInner}, rng);
  x.at(3, 2) = std::numeric_limits<Real>::infinity();
  Tape tape;
  Tensor delta({kLen, kInner}, 0.1), a({kInner, kState}, -1.0), b({kLen, kState}, 1.0), c({kLen, kState}, 1.0),
      d({kInner}, 1.0);
  try {
    selective_scan(tape.constant(x), tape.constant(delta), tape.constant(a), tape.constant(b), tape.constant(c),
                   tape.constant(d), ScanDirection::kForward);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("token 3"), std::string::npos) << e.what();
  }
}

TEST_F(SelectiveScanTest, ShapeErrors) {
  Tape tape;
  EXPECT_THROW(selective_scan(tape.constant(Tensor({4, 2})), tape.constant(Tensor({4, 3})),
                              tape.constant(Tensor({2, 3})), tape.constant(Tensor({4, 3})),
                              tape.constant(Tensor({4, 3})), tape.constant(Tensor({2})), ScanDirection::kForward),
               DimensionError);
}

}  // namespace
}  // namespace sambamixer::ssm
