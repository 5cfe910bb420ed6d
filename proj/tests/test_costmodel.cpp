// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "json.hpp"

#include "bnn/costmodel.hpp"
#include "bnn/repro.hpp"

namespace bnn {
namespace {

const SystolicConfig kBin = SystolicConfig::binary();
const SystolicConfig k8 = SystolicConfig::eight_bit();

// Inserts an op of the given kind after `target`, rewiring its consumers.
GraphSpec insert_after(GraphSpec g, const std::string& target, OpKind op,
                       const std::string& name) {
  const Layer src = *g.find(target);
  for (Layer& l : g.layers)
    for (auto& in : l.inputs)
      if (in == target) in = name;
  Layer n = src;
  n.name = name;
  n.op = op;
  n.inputs = {target};
  n.C = src.N;
  n.H_in = src.H_out;
  n.W_in = src.W_out;
  n.K = 1, n.stride = 1, n.padding = 0;
  n.in_bits = n.out_bits = src.out_bits;
  g.layers.push_back(n);
  return g;
}

TEST(ConvCost, OneToOneExamples) {
  EXPECT_EQ(t_conv_1to1(kBin, 128, 128, 3, 32, 32), 9344);
  EXPECT_EQ(t_conv_1to1(kBin, 512, 512, 3, 7, 7), 7568);
  EXPECT_EQ(t_conv_1to1(kBin, 128, 128, 1, 1, 1), 129);
}

TEST(ConvCost, OneToBExamples) {
  EXPECT_EQ(t_conv_1tob(kBin, 512, 512, 3, 7, 7, 4), 9332);
  EXPECT_EQ(t_conv_1tob(kBin, 256, 256, 3, 14, 14, 4), 10840);
}

TEST(ConvCost, TStar) {
  EXPECT_EQ(t_star(kBin, 128, 32, 32), 128);
  EXPECT_EQ(t_star(kBin, 512, 7, 7), 512);
  EXPECT_EQ(t_star(kBin, 128, 64, 64), 4 * 128);
}

TEST(ReadCost, Examples) {
  EXPECT_EQ(t_read(kBin, 1, 56, 56, 64, 1), 3136);
  EXPECT_EQ(t_read(kBin, 1, 56, 56, 256, 1), 6272);
  EXPECT_EQ(t_read(kBin, 1, 14, 14, 256, 4), 1568);
  EXPECT_EQ(t_eltwise(kBin, 1, 14, 14, 256, 4), 3136);
  EXPECT_EQ(t_eltwise(kBin, 1, 56, 56, 64, 8), 50176);
  EXPECT_EQ(t_requant(kBin, 1, 14, 14, 256, 4), 1568);
}

TEST(Cost, RejectsNonPositive) {
  EXPECT_THROW(t_conv_1to1(kBin, 0, 1, 1, 1, 1), InvalidParam);
  EXPECT_THROW(t_read(kBin, 1, 1, 1, 1, 0), InvalidParam);
  SystolicConfig bad = kBin;
  bad.S = 0;
  EXPECT_THROW(bad.validate(), InvalidParam);
}

TEST(LayerCost, PipelinedOps) {
  Layer bn{"bn", OpKind::BatchNorm, {"x"}, 64, 64, 14, 14, 14, 14, 1, 1, 0, 4, 4};
  EXPECT_EQ(cost_layer(bn, kBin).cycles, 0);
  EXPECT_EQ(cost_layer(bn, kBin).formula, "pipelined");
  Layer sign{"s", OpKind::Sign, {"x"}, 64, 64, 14, 14, 14, 14, 1, 1, 0, 4, 1};
  EXPECT_EQ(cost_layer(sign, kBin).cycles, 0);
  EXPECT_EQ(cost_layer(sign, kBin, {BoundaryPlacement::BinaryArrayBitLines, false}).cycles,
            t_read(kBin, 1, 14, 14, 64, 4));
}

TEST(Block, BiNealStage3Breakdown) {
  const CycleReport r = cycles_network(table1_block(BlockKind::BiNeal, false, 3), {});
  std::map<std::string, Cycles> by;
  for (const auto& e : r.entries) by[e.layer] = e.cycles;
  EXPECT_EQ(by["block.conv1"], 7312);
  EXPECT_EQ(by["block.conv2"], 10840);
  EXPECT_EQ(by["block.skip"], 10840);
  EXPECT_EQ(by["block.add"], 3136);
  EXPECT_EQ(by["block.out"], 0);
  EXPECT_EQ(r.total, 32128);
}

TEST(Block, NormalizationInsertionIsFree) {
  for (auto kind : {BlockKind::BiNeal, BlockKind::BiReal, BlockKind::ResBlock}) {
    const GraphSpec g = table1_block(kind, true, 3);
    const Cycles base = cycles_network(g, {}).total;
    GraphSpec h = g;
    int k = 0;
    for (const Layer& l : g.layers) {
      if (l.op != OpKind::Conv) continue;
      h = insert_after(h, l.name, OpKind::BatchNorm, "extra_bn" + std::to_string(k));
      h = insert_after(h, "extra_bn" + std::to_string(k), OpKind::Scale,
                       "extra_scale" + std::to_string(k));
      ++k;
    }
    h.validate();
    EXPECT_EQ(cycles_network(h, {}).total, base) << to_string(kind);
    EXPECT_EQ(cycles_block(h, kBin).total, cycles_block(g, kBin).total);
  }
}

TEST(Network, AllEightBitUsesEightBitArray) {
  const CycleReport r = cycles_network(build_resnet18(BlockKind::ResBlock, 1.0), {});
  for (const auto& e : r.entries) EXPECT_EQ(e.array, k8.name) << e.layer;
}

TEST(Network, BoundaryPlacement) {
  const GraphSpec g = build_resnet18(BlockKind::BiNeal, 1.0);
  const Cycles bitlines = cycles_network(g, {}).total;
  const Cycles excluded = cycles_network(g, {}, {BoundaryPlacement::Excluded}).total;
  const Cycles eight = cycles_network(g, {}, {BoundaryPlacement::EightBitArray}).total;
  EXPECT_LT(excluded, bitlines);
  EXPECT_LT(bitlines, eight);
  for (const auto& e : cycles_network(g, {}, {BoundaryPlacement::Excluded}).entries)
    if (g.find(e.layer)->boundary) EXPECT_EQ(e.cycles, 0);
  EXPECT_EQ(boundary_placement_from_string("eight-bit"), BoundaryPlacement::EightBitArray);
  EXPECT_THROW(boundary_placement_from_string("gpu"), InvalidParam);
}

TEST(Area, Constants) {
  const AreaReport a = area_report();
  EXPECT_EQ(a.eight_bit.pe, 9472);
  EXPECT_EQ(a.eight_bit.psum, 36800);
  EXPECT_EQ(a.eight_bit.total, 46272);
  EXPECT_NEAR(a.binary_pe_exact, 22630.4, 1e-6);
  EXPECT_EQ(a.binary.pe, 22631);
  EXPECT_EQ(a.binary.psum, 179200);
  EXPECT_EQ(a.binary.total, 201831);
  EXPECT_DOUBLE_EQ(round2(a.pe_ratio), 2.39);
  EXPECT_DOUBLE_EQ(round2(a.psum_ratio), 4.87);
  EXPECT_DOUBLE_EQ(round2(a.total_ratio), 4.36);
  const EnergyBounds e = energy_bounds(a);
  EXPECT_DOUBLE_EQ(round2(e.lower), 2.39);
  EXPECT_DOUBLE_EQ(round2(e.upper), 4.36);
}

TEST(Config, JsonParsing) {
  const ArrayPair p = arrays_from_json(R"({"binary":{"S":64,"P":512},"eight_bit":{"S":8}})");
  EXPECT_EQ(p.binary.S, 64);
  EXPECT_EQ(p.binary.P, 512);
  EXPECT_EQ(p.binary.M, 128);
  EXPECT_EQ(p.eight_bit.S, 8);
  EXPECT_THROW(arrays_from_json(R"({"binary":{"Q":1}})"), ParseError);
  EXPECT_THROW(arrays_from_json(R"({"binary":{"S":-1}})"), ParseError);
  EXPECT_THROW(arrays_from_json("[1"), ParseError);
}

TEST(Reports, CsvAndJson) {
  const CycleReport r = cycles_network(table1_block(BlockKind::BiNeal, false, 3), {});
  const std::string csv = to_csv(r);
  EXPECT_EQ(csv.rfind("layer,op,formula,array,cycles", 0), 0u);
  EXPECT_NE(csv.find("total"), std::string::npos);
  const auto j = nlohmann::json::parse(to_json(r));
  EXPECT_EQ(j["total"].get<Cycles>(), 32128);
}

TEST(Repro, Stage3Table1) {
  const ReproTable t = table1();
  ASSERT_EQ(t.rows.size(), 6u);
  EXPECT_EQ(t.rows[2].computed, 32128);
  EXPECT_TRUE(t.rows[0].pass());
  EXPECT_TRUE(t.rows[2].pass());
  EXPECT_TRUE(t.rows[5].pass());
}

TEST(Repro, ShapeSearchPicksStage3) {
  const ShapeSearch s = shape_search();
  EXPECT_EQ(s.best_stage, 3);
  for (const auto& c : s.candidates)
    if (c.stage != 3) {
      const auto& best = *std::find_if(s.candidates.begin(), s.candidates.end(),
                                       [](const auto& k) { return k.stage == 3; });
      EXPECT_GT(c.mean_abs_error, best.mean_abs_error);
    }
}

}  // namespace
}  // namespace bnn
