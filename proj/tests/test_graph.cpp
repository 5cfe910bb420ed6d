// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "bnn/graph.hpp"

namespace bnn {
namespace {

const Layer& layer(const GraphSpec& g, const std::string& name) {
  const Layer* l = g.find(name);
  if (!l) throw std::runtime_error("missing layer " + name);
  return *l;
}

TEST(Resnet18, ShapeTrace) {
  const GraphSpec g = build_resnet18(BlockKind::BiNeal, 1.0);
  g.validate();
  EXPECT_EQ(layer(g, "stem.conv").H_out, 112);
  EXPECT_EQ(layer(g, "stem.pool").H_out, 56);
  const int widths[] = {64, 128, 256, 512}, sizes[] = {56, 28, 14, 7};
  for (int s = 1; s <= 4; ++s)
    for (int b = 1; b <= 2; ++b) {
      const Layer& out = layer(g, "s" + std::to_string(s) + "b" + std::to_string(b) + ".out");
      EXPECT_EQ(out.N, widths[s - 1]);
      EXPECT_EQ(out.H_out, sizes[s - 1]);
      EXPECT_EQ(out.W_out, sizes[s - 1]);
      EXPECT_EQ(out.out_bits, 1);
    }
  EXPECT_EQ(layer(g, "head.pool").H_out, 1);
  EXPECT_EQ(layer(g, "head.fc").N, 1000);
  EXPECT_EQ(g.output().name, "head.fc");
}

TEST(Resnet18, MultiplierWidensBodyOnly) {
  const GraphSpec g = build_resnet18(BlockKind::BiNeal, 1.5);
  g.validate();
  EXPECT_EQ(layer(g, "stem.conv").N, 64);
  EXPECT_EQ(layer(g, "s1b1.conv1").C, 64);
  const char* outs[] = {"s1b2.out", "s2b2.out", "s3b2.out", "s4b2.out"};
  const int widths[] = {96, 192, 384, 768};
  for (int i = 0; i < 4; ++i) EXPECT_EQ(layer(g, outs[i]).N, widths[i]);
}

TEST(Resnet18, BoundaryFlags) {
  for (auto kind : {BlockKind::ResBlock, BlockKind::BiReal, BlockKind::BiNeal}) {
    const GraphSpec g = build_resnet18(kind, 1.0);
    g.validate();
    for (const Layer& l : g.layers) {
      const bool edge = l.name == "input" || l.name.rfind("stem.", 0) == 0 ||
                        l.name.rfind("head.", 0) == 0;
      EXPECT_EQ(l.boundary, edge) << l.name;
    }
  }
}

TEST(Resnet18, NoStemNoHead) {
  ResNetOptions o;
  o.include_stem = false;
  o.include_head = false;
  const GraphSpec g = build_resnet18(BlockKind::BiReal, 1.0, o);
  g.validate();
  EXPECT_EQ(g.find("stem.conv"), nullptr);
  EXPECT_EQ(g.find("head.fc"), nullptr);
  EXPECT_EQ(layer(g, "input").H_out, 56);
}

TEST(Block, BiNealTopology) {
  const GraphSpec g = build_block({BlockKind::BiNeal, 64, 128, 2}, 28, 28);
  g.validate();
  EXPECT_EQ(layer(g, "block.conv1").out_bits, 1);
  EXPECT_EQ(layer(g, "block.conv2").out_bits, 4);
  EXPECT_EQ(layer(g, "block.skip").out_bits, 4);
  EXPECT_EQ(layer(g, "block.skip").H_out, 14);
  EXPECT_EQ(layer(g, "block.add").inputs.size(), 2u);
  EXPECT_EQ(g.output().name, "block.out");
}

TEST(Block, ResBlockDownsampleHasProjection) {
  const GraphSpec plain = build_block({BlockKind::ResBlock, 64, 64, 1}, 14, 14);
  const GraphSpec ds = build_block({BlockKind::ResBlock, 64, 128, 2}, 28, 28);
  plain.validate();
  ds.validate();
  EXPECT_EQ(plain.find("block.down"), nullptr);
  EXPECT_NE(ds.find("block.down"), nullptr);
  for (const Layer& l : ds.layers) EXPECT_GE(l.in_bits, 8) << l.name;
}

TEST(Validate, Errors) {
  GraphSpec g = build_block({BlockKind::BiNeal, 8, 8, 1}, 4, 4);
  GraphSpec dup = g;
  dup.layers.push_back(dup.layers.back());
  EXPECT_THROW(dup.validate(), GraphError);

  GraphSpec dangling = g;
  dangling.layers[1].inputs = {"nowhere"};
  EXPECT_THROW(dangling.validate(), GraphError);

  GraphSpec cyc = g;
  cyc.layers[1].inputs = {"block.out"};
  EXPECT_THROW(cyc.topological_order(), GraphError);

  GraphSpec bits = g;
  bits.layers[1].in_bits = 4;
  EXPECT_THROW(bits.validate(), GraphError);

  GraphSpec chans = g;
  chans.layers[2].C = 9;
  EXPECT_THROW(chans.validate(), GraphError);

  GraphSpec extent = g;
  extent.layers[1].H_out = 3;
  EXPECT_THROW(extent.validate(), GraphError);

  EXPECT_THROW(GraphSpec{}.output(), GraphError);
}

TEST(Topology, ProducersFirst) {
  const GraphSpec g = build_resnet18(BlockKind::BiReal, 1.0);
  const auto order = g.topological_order();
  ASSERT_EQ(order.size(), g.layers.size());
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < order.size(); ++i) pos[g.layers[order[i]].name] = i;
  for (const Layer& l : g.layers)
    for (const auto& in : l.inputs) EXPECT_LT(pos[in], pos[l.name]);
}

TEST(Json, RoundTrip) {
  for (auto kind : {BlockKind::ResBlock, BlockKind::BiReal, BlockKind::BiNeal}) {
    const GraphSpec g = build_resnet18(kind, 1.25);
    EXPECT_EQ(graph_from_json(to_json(g)), g);
  }
}

TEST(Json, Defaults) {
  const GraphSpec g = graph_from_json(R"({"schema":"bnn.graph","version":1,"layers":[
    {"name":"x","op":"input","N":8,"C":8,"H_out":4,"W_out":4,"in_bits":1,"out_bits":1}]})");
  ASSERT_EQ(g.layers.size(), 1u);
  EXPECT_EQ(g.layers[0].K, 1);
  EXPECT_EQ(g.layers[0].H_in, 4);
  EXPECT_EQ(g.layers[0].B, 1);
}

TEST(Json, Errors) {
  auto msg = [](const std::string& text) {
    try {
      graph_from_json(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(msg("{").find("graph JSON"), std::string::npos);
  EXPECT_NE(msg(R"({"schema":"other","version":1,"layers":[]})").find("schema"),
            std::string::npos);
  EXPECT_NE(msg(R"({"schema":"bnn.graph","version":1,"layers":[{"name":"a","op":"conv"}]})")
                .find("layers[0].in_bits: missing required field"),
            std::string::npos);
  EXPECT_NE(msg(R"({"schema":"bnn.graph","version":1,"layers":[{"name":"a","op":"gelu",
              "N":1,"C":1,"H_out":1,"W_out":1,"in_bits":1,"out_bits":1}]})")
                .find("unknown op"),
            std::string::npos);
}

TEST(Names, RoundTrip) {
  for (int i = 0; i <= static_cast<int>(OpKind::AvgPool); ++i) {
    const auto op = static_cast<OpKind>(i);
    EXPECT_EQ(op_from_string(to_string(op)), op);
  }
  EXPECT_FALSE(op_from_string("softmax"));
  EXPECT_EQ(block_kind_from_string("bireal"), BlockKind::BiReal);
}

}  // namespace
}  // namespace bnn
