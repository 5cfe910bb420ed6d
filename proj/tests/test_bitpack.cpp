// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "bnn/bitpack.hpp"

namespace bnn {
namespace {

SignTensor signs_of(std::initializer_list<int> v) {
  SignTensor t(Shape4{1, 1, 1, static_cast<int>(v.size())});
  int i = 0;
  for (int s : v) t.array()[i++] = static_cast<std::int8_t>(s);
  return t;
}

TEST(Pack, AllPlusIsAllOnes) {
  EXPECT_EQ(pack(signs_of({1, 1, 1, 1})).words()[0], 0b1111u);
}

TEST(Pack, AllMinusIsZero) {
  EXPECT_EQ(pack(signs_of({-1, -1, -1, -1})).words()[0], 0u);
}

TEST(Pack, LsbIsChannelZero) {
  EXPECT_EQ(pack(signs_of({1, -1, 1, 1})).words()[0], 0b1101u);
}

TEST(Pack, RejectsNonSign) {
  EXPECT_THROW(pack(signs_of({1, 0, -1})), InvalidValue);
  RealTensor r(Shape4{1, 1, 1, 2}, 0.5);
  EXPECT_THROW(pack(r), InvalidValue);
}

TEST(Unpack, InvertsWord) {
  const PackedBitTensor p(Shape4{1, 1, 1, 4}, {0b1101});
  const SignTensor s = unpack(p);
  EXPECT_EQ(s, signs_of({1, -1, 1, 1}));
}

TEST(Unpack, SingleChannel) {
  const PackedBitTensor p(Shape4{1, 1, 1, 1}, {0b1});
  EXPECT_EQ(unpack(p).array()[0], 1);
}

TEST(Pack, RoundTripAndTailClear) {
  std::mt19937_64 rng(7);
  std::bernoulli_distribution coin(0.5);
  for (int c = 1; c <= 3 * kWordBits; ++c) {
    SignTensor t(Shape4{2, 2, 3, c});
    for (auto& v : t.array()) v = coin(rng) ? 1 : -1;
    const PackedBitTensor p = pack(t);
    ASSERT_EQ(p.words_per_pixel(), words_for(c));
    ASSERT_TRUE(p.padding_clear()) << "C=" << c;
    ASSERT_EQ(unpack(p), t) << "C=" << c;
  }
}

TEST(Pack, RejectsDirtyTail) {
  EXPECT_THROW(PackedBitTensor(Shape4{1, 1, 1, 3}, {0b11111}), InvalidValue);
}

TEST(ToInt4, Examples) {
  EXPECT_EQ(quantize_int4(0, 1, 0), 0);
  EXPECT_EQ(quantize_int4(100, 1, 0), 7);
  EXPECT_EQ(quantize_int4(-100, 1, 0), -8);
  EXPECT_EQ(quantize_int4(5, 0.5, 0.25), 3);
}

TEST(ToInt4, HalfToEven) {
  EXPECT_EQ(quantize_int4(0.5, 1, 0), 0);
  EXPECT_EQ(quantize_int4(1.5, 1, 0), 2);
  EXPECT_EQ(quantize_int4(2.5, 1, 0), 2);
  EXPECT_EQ(quantize_int4(-2.5, 1, 0), -2);
  EXPECT_EQ(quantize_int4(-3.5, 1, 0), -4);
}

TEST(ToInt4, PerChannelMonotoneAndBounded) {
  AccumTensor acc(Shape4{1, 1, 201, 2});
  for (int x = 0; x < 201; ++x) {
    acc(0, 0, x, 0) = x - 100;
    acc(0, 0, x, 1) = x - 100;
  }
  Eigen::ArrayXd scale(2), offset(2);
  scale << 0.07, 0.3;
  offset << 0.5, -1.25;
  const Int4Tensor q = to_int4(acc, scale, offset);
  for (int c = 0; c < 2; ++c)
    for (int x = 0; x < 201; ++x) {
      const int v = q.at(0, 0, x, c);
      ASSERT_GE(v, -8);
      ASSERT_LE(v, 7);
      if (x > 0) ASSERT_GE(v, q.at(0, 0, x - 1, c));
    }
}

TEST(ToInt4, RejectsBadScale) {
  AccumTensor acc(Shape4{1, 1, 1, 1});
  Eigen::ArrayXd zero = Eigen::ArrayXd::Zero(1), one = Eigen::ArrayXd::Ones(1);
  EXPECT_THROW(to_int4(acc, zero, zero), InvalidParam);
  Eigen::ArrayXd inf = Eigen::ArrayXd::Constant(1, INFINITY);
  EXPECT_THROW(to_int4(acc, one, inf), InvalidParam);
}

TEST(Int4Tensor, NibbleLayout) {
  Int4Tensor t(Shape4{1, 1, 1, 3});
  t.set(0, -1);
  t.set(1, 7);
  t.set(2, -8);
  EXPECT_EQ(t.bytes()[0], 0x7F);
  EXPECT_EQ(t.bytes()[1], 0x08);
  EXPECT_EQ(t.get(0), -1);
  EXPECT_EQ(t.get(2), -8);
}

}  // namespace
}  // namespace bnn
