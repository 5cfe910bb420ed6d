// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bnn/graph.hpp"

namespace bnn {

using Cycles = std::int64_t;

/// S x S processing elements, P psum entries per column, M bits/cycle of
/// input bandwidth.
struct SystolicConfig {
  std::string name = "binary";
  int S = 128;
  int P = 1024;
  int M = 128;
  int psum_bits = 16;
  int pe_bits = 1;

  static SystolicConfig binary();
  static SystolicConfig eight_bit();
  void validate() const;
  friend bool operator==(const SystolicConfig&, const SystolicConfig&) = default;
};

struct ArrayPair {
  SystolicConfig binary = SystolicConfig::binary();
  SystolicConfig eight_bit = SystolicConfig::eight_bit();
};

/// Where stem/head layers of a binary network are costed.
enum class BoundaryPlacement {
  /// Binary array; multi-bit operands stream bit-serially over
  /// in_bits / pe_bits times as many input lines.
  BinaryArrayBitLines,
  EightBitArray,
  Excluded,
};

const char* to_string(BoundaryPlacement p);
BoundaryPlacement boundary_placement_from_string(const std::string& s);

struct CostOptions {
  BoundaryPlacement boundary = BoundaryPlacement::BinaryArrayBitLines;
  /// Cost the sum -> 1-bit Sign as part of the eltwise write (0 cycles).
  /// When false it pays one t_read of its input.
  bool pipeline_sign = true;
};

// W and H are output extents for convolutions, input extents for reads.
Cycles t_star(const SystolicConfig& cfg, std::int64_t N, std::int64_t W,
              std::int64_t H);
Cycles t_conv_1to1(const SystolicConfig& cfg, std::int64_t N, std::int64_t C,
                   std::int64_t K, std::int64_t W, std::int64_t H);
Cycles t_conv_1tob(const SystolicConfig& cfg, std::int64_t N, std::int64_t C,
                   std::int64_t K, std::int64_t W, std::int64_t H, std::int64_t b);
Cycles t_read(const SystolicConfig& cfg, std::int64_t B, std::int64_t W,
              std::int64_t H, std::int64_t C, int bits);
Cycles t_eltwise(const SystolicConfig& cfg, std::int64_t B, std::int64_t W,
                 std::int64_t H, std::int64_t C, int bits);
Cycles t_requant(const SystolicConfig& cfg, std::int64_t B, std::int64_t W,
                 std::int64_t H, std::int64_t C, int bits);

struct CycleEntry {
  std::string layer;
  std::string op;
  std::string formula;  // e.g. "conv-1to1", "read", "pipelined"
  std::string array;    // config name, or "excluded"
  Cycles cycles = 0;
};

struct CycleReport {
  std::vector<CycleEntry> entries;
  Cycles total = 0;
  /// Layers costed at 0 because they are overlapped with data movement.
  std::vector<std::string> pipelined;
};

/// Cost of one layer on `cfg`.
CycleEntry cost_layer(const Layer& l, const SystolicConfig& cfg,
                      const CostOptions& opts = {});

/// Every layer costed on the single array `cfg`.
CycleReport cycles_block(const GraphSpec& g, const SystolicConfig& cfg,
                         const CostOptions& opts = {});

/// Network costing. Graphs whose every layer is at least 8-bit run on the
/// 8-bit array. Otherwise 1-bit-input convs and all body non-conv ops run
/// on the binary array, body convs with multi-bit input on the 8-bit
/// array, and boundary layers follow opts.boundary.
CycleReport cycles_network(const GraphSpec& g, const ArrayPair& arrays,
                           const CostOptions& opts = {});

struct CellAreas {
  double multiplier = 23.0;  // um^2, 8-bit
  double adder = 14.0;
  double xnor = 0.6;
  double popcount = 100.0;  // one per column
  double psum_32b = 2300.0;  // 1024 x 32b
  double psum_16b = 1400.0;  // 1024 x 16b
};

struct ArrayArea {
  std::int64_t pe = 0, psum = 0, total = 0;
};

struct AreaReport {
  ArrayArea eight_bit, binary;
  double pe_ratio = 0, psum_ratio = 0, total_ratio = 0;
  /// Binary PE area before rounding up to whole um^2.
  double binary_pe_exact = 0;
};

AreaReport area_report(const CellAreas& cells = {}, const ArrayPair& arrays = {});

/// Ratios rounded to two decimals.
double round2(double v);

struct EnergyBounds {
  double lower = 0, upper = 0;
};

/// Binary/8-bit power between the PE ratio and the total area ratio.
EnergyBounds energy_bounds(const AreaReport& area);

std::string to_csv(const CycleReport& r);
std::string to_json(const CycleReport& r, int indent = 2);
std::string to_csv(const AreaReport& r);
std::string to_json(const AreaReport& r, int indent = 2);

SystolicConfig config_from_json(const std::string& text);
ArrayPair arrays_from_json(const std::string& text);
ArrayPair load_arrays(const std::string& path);

}  // namespace bnn
