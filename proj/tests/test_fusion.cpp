// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "bnn/engine.hpp"
#include "bnn/fusion.hpp"
#include "bnn/synth.hpp"
#include "oracles.hpp"

namespace bnn {
namespace {

Eigen::ArrayXd one(double v) { return Eigen::ArrayXd::Constant(1, v); }

TEST(BinarizeWeight, Examples) {
  RealTensor w(Shape4{3, 1, 1, 1});
  w.array() << 0.3, -0.3, 0.0;
  WeightSharpness alpha{WeightSharpness::Layout::PerOutput, Eigen::Vector3d(1, -2, 1)};
  Eigen::ArrayXd lambda(3);
  lambda << 0.5, 1, 1;
  const BinarizedWeight b = ref_binarize_weight(w, alpha, lambda);
  EXPECT_EQ(b.binary.array()[0], 1);
  EXPECT_DOUBLE_EQ(b.approx.array()[0], 0.5);
  EXPECT_EQ(b.binary.array()[1], 1);
  EXPECT_EQ(b.binary.array()[2], 1);
}

TEST(BinarizeWeight, ZeroAlphaRejected) {
  RealTensor w(Shape4{1, 1, 1, 1}, 0.3);
  WeightSharpness alpha{WeightSharpness::Layout::PerOutput, one(0)};
  EXPECT_THROW(ref_binarize_weight(w, alpha, one(1)), InvalidParam);
  EXPECT_THROW(fuse_weights(w, alpha), InvalidParam);
}

TEST(FuseWeights, AgreesWithTanhSignIncludingZeros) {
  RealTensor w(Shape4{2, 1, 1, 3});
  w.array() << 0.3, -0.3, 0.0, 0.3, -0.3, 0.0;
  WeightSharpness alpha{WeightSharpness::Layout::PerOutput, Eigen::Vector2d(1, -1)};
  const PackedBitTensor packed = fuse_weights(w, alpha);
  const BinarizedWeight ref = ref_binarize_weight(w, alpha, Eigen::ArrayXd::Ones(2));
  for (int n = 0; n < 2; ++n)
    for (int kx = 0; kx < 3; ++kx)
      EXPECT_EQ(packed.sign(n, 0, kx, 0), ref.binary(n, 0, 0, kx));
  EXPECT_EQ(packed.sign(1, 0, 2, 0), -1);
}

TEST(RefActivation, Examples) {
  const ActivationParams act = ActivationParams::neutral(1, 0.5);
  EXPECT_EQ(ref_binarize_scalar(0.7, act, 0), 1);
  EXPECT_DOUBLE_EQ(ref_presign(-0.7, act, 0), -0.35);
  EXPECT_EQ(ref_binarize_scalar(-0.7, act, 0), -1);
  EXPECT_EQ(ref_binarize_scalar(0.0, act, 0), 1);
}

TEST(RefConv, Examples) {
  RealTensor ones(Shape4{1, 3, 3, 1}, 1.0);
  RealTensor k(Shape4{1, 1, 3, 3}, 1.0);
  EXPECT_DOUBLE_EQ(ref_conv(k, ones, ConvGeometry{3, 1, 0})(0, 0, 0, 0), 9.0);
  RealTensor x(Shape4{1, 2, 2, 1});
  x.array() << 1, -2, 3, 4;
  RealTensor id(Shape4{1, 1, 1, 1}, 1.0);
  EXPECT_EQ(ref_conv(id, x, ConvGeometry{1, 1, 0}), x);
}

TEST(FoldBatchnorm, Examples) {
  FoldedAffine f = fold_batchnorm(one(1), one(0), one(0.7), one(-0.2));
  EXPECT_DOUBLE_EQ(f.tau[0], 0.7);
  EXPECT_DOUBLE_EQ(f.b0[0], -0.2);
  f = fold_batchnorm(one(2), one(3), one(0.5), one(1));
  EXPECT_DOUBLE_EQ(f.tau[0], 1.0);
  EXPECT_DOUBLE_EQ(f.b0[0], 2.5);
  f = fold_batchnorm(one(-1), one(0), one(1), one(0));
  EXPECT_LT(f.tau[0], 0);
}

TEST(AbsorbScale, Examples) {
  EXPECT_DOUBLE_EQ(absorb_incoming_scale(one(1), one(1), one(3))[0], 3);
  EXPECT_DOUBLE_EQ(absorb_incoming_scale(one(2), one(0.5), one(3))[0], 3);
  EXPECT_DOUBLE_EQ(absorb_incoming_scale(one(0.25), one(2), one(3))[0], 1.5);
  EXPECT_THROW(absorb_incoming_scale(one(1), Eigen::ArrayXd::Ones(2), one(1)),
               ShapeError);
}

TEST(SolveThreshold, Examples) {
  Threshold t = solve_threshold(1, 0, 0, 0.5);
  EXPECT_DOUBLE_EQ(t.theta, 0);
  EXPECT_EQ(t.direction, Direction::GE);
  t = solve_threshold(2, 1, -4, 0.5);
  EXPECT_DOUBLE_EQ(t.theta, 1.5);
  EXPECT_EQ(t.direction, Direction::GE);
  t = solve_threshold(-1, 0, 2, 0.25);
  EXPECT_DOUBLE_EQ(t.theta, 8);
  EXPECT_EQ(t.direction, Direction::LE);
}

TEST(SolveThreshold, MatchesGridScan) {
  oracle::Chain a{1, 0, 2, 1, -4, 0.5};
  EXPECT_NEAR(oracle::grid_flip(a, -10, 10, 1.0 / 1024), 1.5, 1e-9);
  EXPECT_EQ(a.out(1.5), 1);
  oracle::Chain b{1, 0, -1, 0, 2, 0.25};
  EXPECT_NEAR(oracle::grid_flip(b, 0, 20, 1.0 / 1024), 8 + 1.0 / 1024, 1e-9);
  EXPECT_EQ(b.out(8.0), 1);
  EXPECT_EQ(b.out(8.01), -1);
}

TEST(SolveThreshold, LiteratureFormDisagreesWithScan) {
  // The alternate closed form mislocates the crossing whenever b0' != 0 and
  // tau' != 1; the scanned flip follows solve_threshold.
  const double lit = oracle::literature_theta(2, 1, -4, 0.5);
  EXPECT_DOUBLE_EQ(lit, 3.0);
  oracle::Chain a{1, 0, 2, 1, -4, 0.5};
  EXPECT_EQ(a.out(1.5), 1);
  EXPECT_EQ(a.out(1.4), -1);
  EXPECT_NE(lit, solve_threshold(2, 1, -4, 0.5).theta);
}

TEST(SolveThreshold, Errors) {
  EXPECT_THROW(solve_threshold(0, 1, 1, 0.25), DegenerateChannel);
  EXPECT_THROW(solve_threshold(1, 1, 1, 0), InvalidParam);
  EXPECT_THROW(solve_threshold(NAN, 1, 1, 0.25), InvalidParam);
}

TEST(IntegerizeThreshold, Examples) {
  EXPECT_EQ(integerize_threshold(1.5, Direction::GE), 2);
  EXPECT_EQ(integerize_threshold(1.5, Direction::LE), 1);
  EXPECT_EQ(integerize_threshold(3.0, Direction::GE), 3);
  EXPECT_EQ(integerize_threshold(1e20, Direction::GE), 1 << 30);
  EXPECT_EQ(integerize_threshold(-1e20, Direction::LE), -(1 << 30));
}

TEST(IntegerizeThreshold, TieAtIntegerFiresPlusOne) {
  const ActivationParams act = [] {
    ActivationParams p = ActivationParams::neutral(1, 0.5);
    p.b0[0] = -3;
    return p;
  }();
  const ChannelThresholds t = fuse_activation(act, one(1));
  EXPECT_EQ(t.theta_int[0], 3);
  EXPECT_TRUE(t.fires(0, 3));
  EXPECT_EQ(ref_binarize_scalar(3.0, act, 0), 1);
  EXPECT_FALSE(t.fires(0, 2));
}

TEST(FuseActivation, ZeroTauIsDegenerate) {
  ActivationParams act = ActivationParams::neutral(2);
  act.tau[1] = 0;
  EXPECT_THROW(fuse_activation(act, one(1)), DegenerateChannel);
  act.tau[1] = 1;
  act.bn_gamma[0] = 0;
  EXPECT_THROW(fuse_activation(act, one(1)), DegenerateChannel);
}

TEST(FuseActivation, ScanAgreesForEverySignCase) {
  Rng rng(11);
  for (int sc = 0; sc < 4; ++sc)
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::ArrayXd scale = one(std::ldexp(1.0, trial % 5 - 2));
      const ActivationParams act = random_activation(rng, scale, {sc, 4, 16, false});
      const ChannelThresholds t = fuse_activation(act, scale);
      const oracle::Chain ch{act.bn_gamma[0], act.bn_beta[0], act.tau[0],
                             act.b0[0],       act.b1[0],      act.prelu_slope[0]};
      const auto want = oracle::scan(ch, scale[0], -40, 40);
      for (int y = -40; y <= 40; ++y)
        ASSERT_EQ(t.fires(0, y) ? 1 : -1, want[y + 40])
            << "case " << sc << " trial " << trial << " y " << y;
    }
}

TEST(FuseUnit, NeutralUnit) {
  OverParamConvUnit u;
  u.weight = RealTensor(Shape4{2, 3, 3, 3}, 0.1);
  u.weight(1, 0, 0, 0) = -0.1;
  u.alpha = {WeightSharpness::Layout::PerOutput, Eigen::ArrayXd::Ones(2)};
  u.lambda = Eigen::ArrayXd::Ones(2);
  u.act = ActivationParams::neutral(2);
  u.geometry = same_geometry(3, 1);
  const FusedBinaryConvUnit f = fuse_unit(u, 1.0);
  EXPECT_EQ(f.threshold.theta_int, (std::vector<std::int32_t>{0, 0}));
  EXPECT_EQ(f.threshold.direction[0], Direction::GE);
  EXPECT_EQ(f.weights.sign(1, 0, 0, 0), -1);
  EXPECT_EQ(f.weights.sign(0, 2, 2, 2), 1);
}

TEST(FuseUnit, NegativeGammaFlipsDirectionAndStaysExact) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    OverParamConvUnit u = random_unit(rng, {6, 5, 3, 1}, 0.5);
    u.act.bn_gamma = -u.act.bn_gamma.abs();
    u.act.tau = u.act.tau.abs();
    const FusedBinaryConvUnit f = fuse_unit(u, 0.5);
    for (int n = 0; n < 5; ++n) {
      if (u.lambda[n] > 0) EXPECT_EQ(f.threshold.direction[n], Direction::LE);
    }
    const SignTensor x = random_signs(rng, Shape4{2, 5, 4, 6});
    ASSERT_EQ(unpack(run_unit_bits(f, pack(x))), ref_unit_bits(u, x, 0.5));
  }
}

TEST(FuseUnit, Int4MatchesReference) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    UnitDraw d{5, 7, 3, 1 + trial % 2, OutKind::Int4};
    const OverParamConvUnit u = random_unit(rng, d, 0.75);
    const FusedBinaryConvUnit f = fuse_unit(u, 0.75);
    const SignTensor x = random_signs(rng, Shape4{1, 6, 5, 5});
    ASSERT_EQ(run_unit_int4(f, pack(x)), ref_unit_int4(u, x, 0.75)) << trial;
  }
}

TEST(FuseBlock, MatchesReference) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int cin = 3 + trial % 5, cout = 4 + trial % 3, stride = 1 + trial % 2;
    BiNealBlockParams blk;
    blk.conv1 = random_unit(rng, {cin, cout, 3, stride, OutKind::Bit1}, 0.5);
    blk.conv2 = random_unit(rng, {cout, cout, 3, 1, OutKind::Int4}, blk.conv1.act.kappa);
    blk.skip = random_unit(rng, {cin, cout, 3, stride, OutKind::Int4}, 0.5);
    blk.output = random_activation(rng, Eigen::ArrayXd::Ones(cout), {});
    const FusedBiNealBlock f = fuse_block(blk, 0.5);
    const SignTensor x = random_signs(rng, Shape4{2, 6, 6, cin});
    ASSERT_EQ(unpack(run_block(f, pack(x))), ref_block_forward(blk, x, 0.5)) << trial;
  }
}

}  // namespace
}  // namespace bnn
