// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <limits>

#include "sambamixer/error.hpp"
#include "sambamixer/mixer/encoder.hpp"
#include "sambamixer/numerics/grad_check.hpp"
#include "sambamixer/numerics/ops.hpp"
#include "test_support.hpp"

namespace sambamixer::mixer {
namespace {

using numerics::Tensor;
using testing::random_tensor;

void zero_block(const MambaBlock& block) {
  block.in_proj().value.fill(0);
  block.out_proj().value.fill(0);
  block.out_bias().value.fill(0);
}

GTEST_TEST(MambaBlockTest, ZeroBranchIsResidualPassThrough) {
  std::mt19937_64 rng(1);
  ParameterSet params;
  MambaBlock block(params, "blk", {8, 4, 2, 4}, BlockKind::kForward, rng);
  for (std::size_t i = 0; i < params.size(); ++i) params[i].value.fill(0);
  Tape tape;
  const Tensor x = random_tensor({6, 8}, rng);
  EXPECT_EQ(block.forward(tape, tape.constant(x)).value().values(), x.values());
}

GTEST_TEST(MambaBlockTest, ShapeContract) {
  std::mt19937_64 rng(2);
  for (std::size_t len : {8u, 128u})
    for (std::size_t width : {8u, 256u}) {
      ParameterSet params;
      MambaBlock block(params, "blk", {width, 16, 2, 4}, BlockKind::kForward, rng);
      Tape tape;
      const Var y = block.forward(tape, tape.constant(random_tensor({len, width}, rng)));
      EXPECT_EQ(y.shape(), (numerics::Shape{len, width}));
      EXPECT_TRUE(y.value().all_finite());
    }
}

GTEST_TEST(MambaBlockTest, ParameterLayout) {
  std::mt19937_64 rng(3);
  ParameterSet params;
  const MambaConfig cfg{16, 4, 2, 4};
  MambaBlock block(params, "blk", cfg, BlockKind::kBidirectional, rng);
  EXPECT_EQ(block.in_proj().value.shape(), (numerics::Shape{16, 64}));
  EXPECT_EQ(block.out_proj().value.shape(), (numerics::Shape{32, 16}));
  ASSERT_EQ(block.branches().size(), 2u);
  EXPECT_EQ(block.branches()[0].conv_weight->value.shape(), (numerics::Shape{32, 4}));
  EXPECT_EQ(block.branches()[1].direction, ScanDirection::kBackward);
  EXPECT_EQ(cfg.dt_rank(), 1u);
  EXPECT_EQ((MambaConfig{256, 16, 2, 4}.dt_rank()), 16u);
}

GTEST_TEST(MambaBlockTest, ForwardBlockIsCausal) {
  std::mt19937_64 rng(4);
  ParameterSet params;
  MambaBlock block(params, "blk", {8, 4, 2, 4}, BlockKind::kForward, rng);
  Tensor x = random_tensor({10, 8}, rng);
  Tape tape;
  const Tensor y0 = block.forward(tape, tape.constant(x)).value();
  for (std::size_t e = 0; e < 8; ++e) x.at(5, e) += 0.3;
  const Tensor y1 = block.forward(tape, tape.constant(x)).value();
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t e = 0; e < 8; ++e) EXPECT_EQ(y0.at(t, e), y1.at(t, e));
  EXPECT_NE(y0.at(5, 0), y1.at(5, 0));
}

GTEST_TEST(MambaBlockTest, BidirectionalSeesTheFuture) {
  std::mt19937_64 rng(5);
  ParameterSet params;
  MambaBlock block(params, "blk", {8, 4, 2, 4}, BlockKind::kBidirectional, rng);
  Tensor x = random_tensor({10, 8}, rng);
  Tape tape;
  const Tensor y0 = block.forward(tape, tape.constant(x)).value();
  for (std::size_t e = 0; e < 8; ++e) x.at(5, e) += 0.3;
  const Tensor y1 = block.forward(tape, tape.constant(x)).value();
  EXPECT_NE(y0.at(0, 0), y1.at(0, 0));
}

GTEST_TEST(MambaBlockTest, WidthMismatch) {
  std::mt19937_64 rng(6);
  ParameterSet params;
  MambaBlock block(params, "blk", {8, 4, 2, 4}, BlockKind::kForward, rng);
  Tape tape;
  EXPECT_THROW(block.forward(tape, tape.constant(Tensor({4, 6}))), DimensionError);
}

class WeightedInputTest : public ::testing::Test {
 protected:
  void SetUp() override {
    encoder = Encoder(params, "enc", {3, 4, 2, 5, 2, 4, Backbone::kSambaMixer}, rng);
    for (int i = 0; i < 4; ++i) {
      tokens.push_back(random_tensor({5, 4}, rng));
      channels.push_back(random_tensor({5, 4}, rng));
    }
  }
  EncoderState state_for(Tape& tape, std::size_t n_token, std::size_t n_channel) {
    EncoderState s;
    for (std::size_t i = 0; i < n_token; ++i) s.y_token.push_back(tape.constant(tokens[i]));
    for (std::size_t i = 0; i < n_channel; ++i) s.y_channel.push_back(tape.constant(channels[i]));
    return s;
  }

  std::mt19937_64 rng{8};
  ParameterSet params;
  Encoder encoder;
  std::vector<Tensor> tokens, channels;
};

TEST_F(WeightedInputTest, InitialisationIsAPlainStack) {
  Tape tape;
  const auto& b1 = encoder.blocks()[0];
  EXPECT_EQ(weighted_token_input(tape, b1, state_for(tape, 1, 1)).value().values(), tokens[0].values());
  EXPECT_EQ(weighted_channel_input(tape, b1, state_for(tape, 2, 1)).value().values(), tokens[1].values());
  const auto& b2 = encoder.blocks()[1];
  EXPECT_EQ(weighted_token_input(tape, b2, state_for(tape, 2, 2)).value().values(), channels[1].values());
  EXPECT_EQ(weighted_channel_input(tape, b2, state_for(tape, 3, 2)).value().values(), tokens[2].values());
}

TEST_F(WeightedInputTest, OneHotOnLatestToken) {
  const auto& b2 = encoder.blocks()[1];
  b2.alpha->value = Tensor::vector({0, 1});
  b2.beta->value = Tensor::vector({0, 0});
  Tape tape;
  EXPECT_EQ(weighted_token_input(tape, b2, state_for(tape, 2, 2)).value().values(), tokens[1].values());
}

TEST_F(WeightedInputTest, RandomWeightsMatchNaiveSum) {
  const auto& b3 = encoder.blocks()[2];
  b3.alpha->value = random_tensor({3}, rng);
  b3.beta->value = random_tensor({3}, rng);
  b3.theta->value = random_tensor({4}, rng);
  b3.gamma->value = random_tensor({3}, rng);
  Tape tape;
  const Tensor xt = weighted_token_input(tape, b3, state_for(tape, 3, 3)).value();
  const Tensor xc = weighted_channel_input(tape, b3, state_for(tape, 4, 3)).value();
  for (std::size_t k = 0; k < 20; ++k) {
    double t = 0, c = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      t += b3.alpha->value[i] * tokens[i][k] + b3.beta->value[i] * channels[i][k];
      c += b3.theta->value[i] * tokens[i][k] + b3.gamma->value[i] * channels[i][k];
    }
    c += b3.theta->value[3] * tokens[3][k];
    EXPECT_NEAR(xt[k], t, 1e-12);
    EXPECT_NEAR(xc[k], c, 1e-12);
  }
}

TEST_F(WeightedInputTest, WrongHistoryLengthIsALogicError) {
  Tape tape;
  EXPECT_THROW(weighted_token_input(tape, encoder.blocks()[2], state_for(tape, 2, 2)), std::logic_error);
  EXPECT_THROW(weighted_channel_input(tape, encoder.blocks()[0], state_for(tape, 1, 1)), std::logic_error);
}

GTEST_TEST(EncoderTest, ZeroedBlockIsIdentity) {
  std::mt19937_64 rng(9);
  ParameterSet params;
  Encoder enc(params, "enc", {1, 6, 2, 7, 2, 4, Backbone::kSambaMixer}, rng);
  zero_block(enc.blocks()[0].time_mixer);
  zero_block(*enc.blocks()[0].channel_mixer);
  Tape tape;
  const Tensor x = random_tensor({7, 6}, rng);
  EXPECT_EQ(enc.forward(tape, tape.constant(x)).value().values(), x.values());
}

GTEST_TEST(EncoderTest, DropPathSkipsWholeBlocks) {
  std::mt19937_64 init(10);
  ParameterSet params;
  Encoder enc(params, "enc", {2, 4, 2, 5, 2, 4, Backbone::kSambaMixer}, init);
  const Tensor x = random_tensor({5, 4}, init);
  int identical = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    Tape tape;
    const Tensor y = enc.forward(tape, tape.constant(x), DropPath{0.999, true, &rng}).value();
    identical += y.values() == x.values();
  }
  EXPECT_GE(identical, 95);
}

GTEST_TEST(EncoderTest, EvalModeIsDeterministicAndNeverDrops) {
  std::mt19937_64 init(11);
  ParameterSet params;
  Encoder enc(params, "enc", {2, 4, 2, 5, 2, 4, Backbone::kSambaMixer}, init);
  const Tensor x = random_tensor({5, 4}, init);
  std::mt19937_64 rng(0);
  Tape tape;
  const Tensor a = enc.forward(tape, tape.constant(x), DropPath{0.9, false, &rng}).value();
  const Tensor b = enc.forward(tape, tape.constant(x)).value();
  EXPECT_EQ(a.values(), b.values());
  EXPECT_NE(a.values(), x.values());
}

GTEST_TEST(EncoderTest, RejectsBadDropRate) {
  std::mt19937_64 rng(12);
  ParameterSet params;
  Encoder enc(params, "enc", {1, 4, 2, 5, 2, 4, Backbone::kSambaMixer}, rng);
  Tape tape;
  const Var x = tape.constant(Tensor({5, 4}));
  EXPECT_THROW(enc.forward(tape, x, DropPath{1.0, true, &rng}), ParameterError);
  EXPECT_THROW(enc.forward(tape, x, DropPath{-0.1, true, &rng}), ParameterError);
}

GTEST_TEST(EncoderTest, VanillaBackboneHasNoChannelMixers) {
  std::mt19937_64 rng(13);
  ParameterSet vanilla, full;
  Encoder a(vanilla, "enc", {2, 8, 4, 9, 2, 4, Backbone::kVanillaMamba}, rng);
  Encoder b(full, "enc", {2, 8, 4, 9, 2, 4, Backbone::kSambaMixer}, rng);
  for (const auto& blk : a.blocks()) EXPECT_FALSE(blk.channel_mixer.has_value());
  EXPECT_LT(vanilla.element_count(), full.element_count());
  Tape tape;
  EXPECT_EQ(a.forward(tape, tape.constant(random_tensor({9, 8}, rng))).shape(), (numerics::Shape{9, 8}));
}

GTEST_TEST(EncoderTest, NumericErrorNamesBlock) {
  std::mt19937_64 rng(14);
  ParameterSet params;
  Encoder enc(params, "enc", {2, 4, 2, 5, 2, 4, Backbone::kSambaMixer}, rng);
  Tensor x = random_tensor({5, 4}, rng);
  x.at(2, 1) = std::numeric_limits<Real>::quiet_NaN();
  Tape tape;
  try {
    enc.forward(tape, tape.constant(x));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("block 1:", 0), 0u) << e.what();
  }
}

GTEST_TEST(EncoderTest, GradientCheckTinyConfig) {
  std::mt19937_64 rng(15);
  ParameterSet params;
  Encoder enc(params, "enc", {2, 8, 4, 8, 2, 4, Backbone::kSambaMixer}, rng);
  // Move the skip weights off their one-hot start so every path carries gradient.
  for (const auto& blk : enc.blocks())
    for (Parameter* p : {blk.alpha, blk.beta, blk.theta, blk.gamma})
      for (Real& v : p->value.data()) v += 0.3;
  Parameter& input = params.add("input", random_tensor({8, 8}, rng));
  const Tensor weights = random_tensor({8, 8}, rng);
  auto f = [&](Tape& tape) {
    return numerics::sum(numerics::mul(enc.forward(tape, tape.param(input)), tape.constant(weights)));
  };
  const auto r = numerics::grad_check(f, params.pointers(), 1e-5);
  EXPECT_LT(r.max_relative_error, 1e-3) << r.worst_parameter << "[" << r.worst_index << "]";
}

}  // namespace
}  // namespace sambamixer::mixer
