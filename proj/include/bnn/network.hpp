// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bnn/engine.hpp"
#include "bnn/model.hpp"

namespace bnn {

/// Inference-time data: packed 1-bit, INT4 codes, or real (8-bit and wider).
using Value = std::variant<PackedBitTensor, Int4Tensor, RealTensor>;
/// Training-form data: ±1 as int8, INT4 codes, or real.
using RefValue = std::variant<SignTensor, Int4Tensor, RealTensor>;

Shape4 shape_of(const Value& v);
Shape4 shape_of(const RefValue& v);
/// Packs ±1 tensors; other kinds pass through.
Value to_value(const RefValue& v);
int bits_of(const Value& v);

using Trace = std::map<std::string, Value>;

// Parameter access by layer name.
ActivationParams load_activation(const Model& m, const std::string& layer);
void store_activation(Model& m, const std::string& layer, const ActivationParams& act);
OverParamConvUnit load_unit(const Model& m, const Layer& l);
void store_unit(Model& m, const Layer& l, const OverParamConvUnit& unit);
ChannelThresholds load_thresholds(const Model& m, const std::string& layer);
void store_thresholds(Model& m, const std::string& layer, const ChannelThresholds& t);
FusedBinaryConvUnit load_fused_unit(const Model& m, const Layer& l);

/// Training-form forward pass. Each 1-bit value carries the scale kappa of
/// its producer; the input's comes from "input.kappa".
RefValue ref_forward(const Model& training, const RefValue& x, Trace* trace = nullptr);

struct AuditEntry {
  std::string layer;
  int channel = 0;
  double theta = 0;
  std::int32_t theta_int = 0;
  Direction direction = Direction::GE;
};

/// Folds every auxiliary parameter into packed weights, integer thresholds
/// and INT4 requant affines. Incoming scales resolve in topological order.
Model fuse_model(const Model& training, std::vector<AuditEntry>* audit = nullptr);

/// Executes a fused model. An empty graph is the identity.
Value run_graph(const Model& fused, const Value& x, const ExecOptions& opts = {},
                Trace* trace = nullptr);

struct Mismatch {
  std::string layer;
  int b = 0, y = 0, x = 0, c = 0;
  std::string expected, actual;
  std::string str() const;
};

/// First differing element. Reals compare with relative tolerance `rtol`.
std::optional<Mismatch> compare_values(const Value& expected, const Value& actual,
                                       double rtol = 1e-9);
/// Element count that differs.
std::int64_t count_mismatches(const Value& expected, const Value& actual,
                              double rtol = 1e-9);

// Raw tensor blobs: 8 little-endian u32 (magic, dtype, B, H, W, C, word
// size, reserved) followed by the payload.
inline constexpr std::uint32_t kTensorMagic = 0x42544E42;  // "BNTB"
std::vector<std::uint8_t> encode_tensor(const Value& v);
Value decode_tensor(const std::vector<std::uint8_t>& bytes);

}  // namespace bnn
