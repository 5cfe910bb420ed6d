// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "bnn/costmodel.hpp"

namespace bnn {

struct ReproRow {
  std::string label;
  double published = 0;  // cycles
  Cycles computed = 0;
  double tolerance = 0;  // relative
  CycleReport breakdown;

  double rel_error() const { return (computed - published) / published; }
  bool pass() const;
};

struct ReproTable {
  std::string title;
  double unit = 1e3;  // display divisor
  std::string unit_suffix = "K";
  std::vector<ReproRow> rows;

  bool all_pass() const;
};

/// ResNet-18 stage k (1..4): width 64 * 2^(k-1) at 56 / 2^(k-1).
struct StageShape {
  int stage = 3;
  int channels = 256;
  int size = 14;
};
StageShape resnet18_stage(int stage);

/// Block fragments of one table-1 row at a stage shape. The downsample
/// variant enters from the previous stage (stage >= 2).
GraphSpec table1_block(BlockKind kind, bool downsample, int stage, int skip_kernel = 3);

ReproTable table1(int stage = 3, const ArrayPair& arrays = {},
                  const CostOptions& opts = {}, int skip_kernel = 3);

struct ShapeCandidate {
  int stage = 0;
  std::vector<double> row_errors;  // signed relative errors, table-1 order
  double mean_abs_error = 0;
};

struct ShapeSearch {
  std::vector<ShapeCandidate> candidates;  // stages 2..4, all six rows
  int best_stage = 0;
  /// Best stage per row, searched over every stage where the row exists.
  std::vector<int> per_row_best;
  std::vector<std::string> labels;
};

ShapeSearch shape_search(const ArrayPair& arrays = {}, const CostOptions& opts = {},
                         int skip_kernel = 3);

ReproTable table2_cycles(const ArrayPair& arrays = {}, const CostOptions& opts = {});

std::string format_table(const ReproTable& t, bool with_breakdown = false);
std::string format_shape_search(const ShapeSearch& s);
std::string to_json(const ReproTable& t, int indent = 2);

}  // namespace bnn
