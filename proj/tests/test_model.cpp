// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>

#include "bnn/model.hpp"
#include "bnn/network.hpp"
#include "bnn/synth.hpp"

namespace bnn {
namespace {

Model small_training() {
  return synth_training_model(build_block({BlockKind::BiNeal, 8, 16, 2}, 6, 6), 3);
}

std::uint32_t u32_at(const std::vector<std::uint8_t>& b, std::size_t off) {
  std::uint32_t v;
  std::memcpy(&v, b.data() + off, 4);
  return v;
}

TEST(Container, RoundTripTraining) {
  const Model m = small_training();
  m.validate();
  const auto bytes = serialize_model(m);
  ASSERT_GE(bytes.size(), 64u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "BNLM");
  EXPECT_EQ(u32_at(bytes, 4), kContainerVersion);
  EXPECT_EQ(u32_at(bytes, 8), 1u);
  EXPECT_EQ(parse_model(bytes), m);
}

TEST(Container, RoundTripFused) {
  const Model f = fuse_model(small_training());
  f.validate();
  const auto bytes = serialize_model(f);
  EXPECT_EQ(u32_at(bytes, 8), 2u);
  EXPECT_EQ(parse_model(bytes), f);
  EXPECT_EQ(serialize_model(parse_model(bytes)), bytes);
}

TEST(Container, CorruptionDetected) {
  const auto bytes = serialize_model(small_training());
  auto flipped = bytes;
  flipped.back() ^= 0x40;
  EXPECT_THROW(parse_model(flipped), ParseError);
  auto graph_hit = bytes;
  graph_hit[70] ^= 0x01;
  EXPECT_THROW(parse_model(graph_hit), ParseError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(parse_model(magic), ParseError);
  auto version = bytes;
  version[4] = 9;
  EXPECT_THROW(parse_model(version), ParseError);
  EXPECT_THROW(parse_model({bytes.begin(), bytes.begin() + 40}), ParseError);
  EXPECT_THROW(parse_model({bytes.begin(), bytes.end() - 3}), ParseError);
}

TEST(Container, FileIo) {
  const Model m = small_training();
  const std::string path = ::testing::TempDir() + "bnn_model_io.bnlm";
  save_model(m, path);
  EXPECT_EQ(load_model(path), m);
  EXPECT_THROW(load_model(path + ".missing"), IoError);
}

TEST(Model, ValidateCatchesProblems) {
  Model m = small_training();
  Model extra = m;
  extra.tensors["nobody.weight"] = Blob::f64(Eigen::ArrayXd::Ones(2));
  EXPECT_THROW(extra.validate(), GraphError);
  Model missing = m;
  missing.tensors.erase("block.conv1.weight");
  EXPECT_THROW(missing.validate(), GraphError);
  Model wrong = m;
  wrong.tensors["block.conv1.lambda"] = Blob::f64(Eigen::ArrayXd::Ones(3));
  EXPECT_THROW(wrong.validate(), ShapeError);
}

TEST(Model, RequiredParams) {
  const GraphSpec g = build_block({BlockKind::BiNeal, 8, 8, 1}, 4, 4);
  const auto conv1 = required_params(*g.find("block.conv1"), ModelKind::Training);
  EXPECT_NE(std::find(conv1.begin(), conv1.end(), "block.conv1.kappa"), conv1.end());
  const auto fused = required_params(*g.find("block.conv1"), ModelKind::Fused);
  EXPECT_NE(std::find(fused.begin(), fused.end(), "block.conv1.theta_int"), fused.end());
  const auto conv2 = required_params(*g.find("block.conv2"), ModelKind::Fused);
  EXPECT_NE(std::find(conv2.begin(), conv2.end(), "block.conv2.requant_scale"), conv2.end());
}

TEST(Blob, Accessors) {
  Eigen::ArrayXd v(3);
  v << 1.5, -2, 0.25;
  EXPECT_TRUE((Blob::f32(v).reals() == v).all());
  EXPECT_TRUE((Blob::f64(v).reals() == v).all());
  EXPECT_EQ(Blob::i32({1, -2}).ints(), (std::vector<std::int32_t>{1, -2}));
  EXPECT_THROW(Blob::i32({1}).reals(), InvalidParam);
  PackedBitTensor p(Shape4{2, 1, 3, 70});
  p.set_bit(1, 0, 2, 69, true);
  EXPECT_EQ(Blob::bits(p).packed(), p);
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a64(nullptr, 0), 0xcbf29ce484222325ULL);
  const std::uint8_t a[] = {'a'};
  EXPECT_EQ(fnv1a64(a, 1), 0xaf63dc4c8601ec8cULL);
}

TEST(TensorBlob, RoundTrip) {
  Rng rng(4);
  const Value bits = to_value(random_signs(rng, Shape4{2, 3, 3, 70}));
  const Value q = random_int4(rng, Shape4{1, 2, 3, 5});
  const Value r = random_reals(rng, Shape4{1, 2, 2, 3});
  for (const Value& v : {bits, q, r}) {
    const auto enc = encode_tensor(v);
    EXPECT_EQ(u32_at(enc, 0), kTensorMagic);
    EXPECT_EQ(decode_tensor(enc), v);
  }
  auto bad = encode_tensor(bits);
  bad[0] = 0;
  EXPECT_THROW(decode_tensor(bad), ParseError);
  auto short_payload = encode_tensor(r);
  short_payload.pop_back();
  EXPECT_THROW(decode_tensor(short_payload), ParseError);
}

}  // namespace
}  // namespace bnn
