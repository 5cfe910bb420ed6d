// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

#include "bnn/bitpack.hpp"
#include "bnn/fusion.hpp"

namespace bnn {

enum class BlockKind { ResBlock, BiReal, BiNeal };

/// Topology of one residual block. cin/cout are base channel counts; the
/// BiNeal kind multiplies them by `multiplier`.
struct BlockSpec {
  BlockKind kind = BlockKind::BiNeal;
  int cin = 64;
  int cout = 64;
  int stride = 1;
  double multiplier = 1.0;
  int skip_kernel = 3;
  /// Widen the input side too. Off for the first block after an unwidened stem.
  bool scale_input = true;

  int in_channels() const;
  int out_channels() const;
  bool downsample() const { return stride != 1 || in_channels() != out_channels(); }
};

struct ExecOptions {
  /// Worker threads for convolution. Results are bit-identical for any value.
  int threads = 1;
};

/// 2 * popcount(XNOR(a, w) over the first `length` bits) - length, which
/// equals the ±1 dot product.
std::int32_t xnor_dot(std::span<const Word> a, std::span<const Word> w,
                      int length);

/// Raw accumulators of a ±1 convolution. Out-of-image taps read -1.
AccumTensor binary_conv(const PackedBitTensor& x, const PackedBitTensor& weights,
                        ConvGeometry geometry, const ExecOptions& opts = {});
AccumTensor binary_conv(const PackedBitTensor& x, const FusedBinaryConvUnit& unit,
                        const ExecOptions& opts = {});

PackedBitTensor threshold_sign(const AccumTensor& acc,
                               const ChannelThresholds& thresholds);
PackedBitTensor threshold_sign(const Int4Tensor& q,
                               const ChannelThresholds& thresholds);
PackedBitTensor threshold_sign(const RealTensor& v,
                               const ChannelThresholds& thresholds);

/// Saturating elementwise add in [-8, 7].
Int4Tensor eltwise_add_int4(const Int4Tensor& a, const Int4Tensor& b);

/// Conv + threshold-sign or conv + INT4 requant, per the unit's out_kind.
PackedBitTensor run_unit_bits(const FusedBinaryConvUnit& unit,
                              const PackedBitTensor& x, const ExecOptions& opts = {});
Int4Tensor run_unit_int4(const FusedBinaryConvUnit& unit, const PackedBitTensor& x,
                         const ExecOptions& opts = {});

PackedBitTensor run_block(const FusedBiNealBlock& block, const PackedBitTensor& x,
                          const ExecOptions& opts = {});

}  // namespace bnn
