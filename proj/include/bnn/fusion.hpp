// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "bnn/bitpack.hpp"
#include "bnn/refmodel.hpp"

namespace bnn {

/// GE: output +1 iff input >= threshold. LE: +1 iff input <= threshold.
enum class Direction : std::uint8_t { GE = 0, LE = 1 };

struct Threshold {
  double theta = 0.0;
  Direction direction = Direction::GE;
};

/// Per-channel threshold-sign. Integer inputs compare against theta_int,
/// real inputs against theta.
struct ChannelThresholds {
  std::vector<double> theta;
  std::vector<std::int32_t> theta_int;
  std::vector<Direction> direction;

  int channels() const { return static_cast<int>(theta_int.size()); }
  bool fires(int n, std::int64_t y) const {
    return direction[n] == Direction::GE ? y >= theta_int[n] : y <= theta_int[n];
  }
  bool fires_real(int n, double v) const {
    return direction[n] == Direction::GE ? v >= theta[n] : v <= theta[n];
  }
  friend bool operator==(const ChannelThresholds&,
                         const ChannelThresholds&) = default;
};

/// Inference form of one conv unit. Weights are packed N x K x K x C.
struct FusedBinaryConvUnit {
  PackedBitTensor weights;
  ConvGeometry geometry;
  OutKind out_kind = OutKind::Bit1;
  ChannelThresholds threshold;                    // Bit1
  Eigen::ArrayXd requant_scale, requant_offset;  // Int4

  int out_channels() const { return weights.batch(); }
  int in_channels() const { return weights.channels(); }
  /// Accumulator bound C * K * K.
  int length() const { return in_channels() * geometry.kernel * geometry.kernel; }
};

struct FusedBiNealBlock {
  FusedBinaryConvUnit conv1, conv2, skip;
  ChannelThresholds output;
};

/// Packed Sign(alpha) * Sign(W_f), with exact zeros of W_f treated as +0.
PackedBitTensor fuse_weights(const RealTensor& weight,
                             const WeightSharpness& alpha);

struct FoldedAffine {
  Eigen::ArrayXd tau, b0;
};

/// tau' = tau * gamma, b0' = tau * beta + b0.
FoldedAffine fold_batchnorm(const Eigen::ArrayXd& gamma,
                            const Eigen::ArrayXd& beta,
                            const Eigen::ArrayXd& tau, const Eigen::ArrayXd& b0);

/// gamma'(n) = gamma(n) * kappa * lambda(n). kappa broadcasts from length
/// 1 or matches lambda.
Eigen::ArrayXd absorb_incoming_scale(const Eigen::ArrayXd& kappa,
                                     const Eigen::ArrayXd& lambda,
                                     const Eigen::ArrayXd& gamma);

/// Zero crossing of PReLU(tau' * A + b0') + b1 in A.
///
/// PReLU(x) + b1 is strictly increasing and crosses zero at
/// x* = -b1 (b1 <= 0, positive segment) or x* = -b1 / slope (b1 > 0,
/// negative segment). Then theta = (x* - b0') / tau', and the composed
/// map is increasing iff tau' > 0. At A == theta the pre-sign value is 0,
/// which binarizes to +1; both directions include equality.
Threshold solve_threshold(double tau, double b0, double b1, double prelu_slope);

/// ceil(theta) for GE, floor(theta) for LE, clamped to +-2^30.
std::int32_t integerize_threshold(double theta, Direction direction);

/// Thresholds for an activation whose real input is input_scale(n) * y.
ChannelThresholds fuse_activation(const ActivationParams& act,
                                  const Eigen::ArrayXd& input_scale);

FusedBinaryConvUnit fuse_unit(const OverParamConvUnit& unit,
                              const Eigen::ArrayXd& kappa_in);
FusedBinaryConvUnit fuse_unit(const OverParamConvUnit& unit, double kappa_in);

FusedBiNealBlock fuse_block(const BiNealBlockParams& block, double kappa_in);

}  // namespace bnn
