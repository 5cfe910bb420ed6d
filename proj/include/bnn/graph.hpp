// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bnn/engine.hpp"

namespace bnn {

enum class OpKind {
  Input,
  Conv,
  EltwiseAdd,
  Requant,  // standalone bit-depth conversion, e.g. re-binarizing a real map
  Sign,     // sum -> 1-bit conversion fused with the producing eltwise write
  BatchNorm,
  Scale,
  PReLU,
  ReLU,
  MaxPool,
  AvgPool,
};

const char* to_string(OpKind op);
std::optional<OpKind> op_from_string(const std::string& s);

/// One node. N is the output channel count (equal to C for non-conv ops);
/// H/W are spatial extents, K the square kernel.
struct Layer {
  std::string name;
  OpKind op = OpKind::Conv;
  std::vector<std::string> inputs;
  int N = 0, C = 0;
  int H_in = 0, W_in = 0, H_out = 0, W_out = 0;
  int K = 1, stride = 1, padding = 0;
  int in_bits = 1, out_bits = 1;
  int B = 1;
  /// Stem or head layer of a network (as opposed to the block body).
  bool boundary = false;

  ConvGeometry geometry() const { return {K, stride, padding}; }
  friend bool operator==(const Layer&, const Layer&) = default;
};

struct GraphSpec {
  static constexpr int kSchemaVersion = 1;

  std::string name;
  double multiplier = 1.0;
  std::vector<Layer> layers;

  const Layer* find(const std::string& layer) const;
  /// Layer indices in dependency order. Throws GraphError on dangling
  /// inputs, duplicate names or cycles.
  std::vector<int> topological_order() const;
  /// The single layer no other layer consumes.
  const Layer& output() const;
  /// Full consistency check: names, edges, acyclicity, shapes, bit-depths.
  void validate() const;

  friend bool operator==(const GraphSpec&, const GraphSpec&) = default;
};

/// Appends a block reading `input` and returns the name of its output layer.
std::string append_block(GraphSpec& g, const BlockSpec& spec,
                         const std::string& input, const std::string& prefix);

/// Standalone fragment: an input layer of spatial size height x width
/// followed by one block.
GraphSpec build_block(const BlockSpec& spec, int height, int width);

struct ResNetOptions {
  int input_size = 224;
  int input_channels = 3;
  bool include_stem = true;
  bool include_head = true;
  int classes = 1000;
};

/// ResNet-18 stage plan (64@56, 128@28, 256@14, 512@7, two blocks each).
/// Stem (7x7/2 conv + 3x3/2 max-pool) and classifier stay 8-bit and are
/// marked boundary; the stem is never widened by the multiplier.
GraphSpec build_resnet18(BlockKind kind, double multiplier,
                         const ResNetOptions& opts = {});

std::string to_json(const GraphSpec& g, int indent = 2);
GraphSpec graph_from_json(const std::string& text);
GraphSpec load_graph(const std::string& path);
void save_graph(const GraphSpec& g, const std::string& path);

const char* to_string(BlockKind kind);
std::optional<BlockKind> block_kind_from_string(const std::string& s);

}  // namespace bnn
