// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnn/fusion.hpp"

#include <cmath>

namespace bnn {

PackedBitTensor fuse_weights(const RealTensor& weight,
                             const WeightSharpness& alpha) {
  const Shape4 s = weight.shape();
  if (alpha.values.size() !=
      WeightSharpness::expected_size(alpha.layout, s.d0, s.d1, s.d2))
    throw ShapeError("alpha_w size does not match its layout");
  if ((alpha.values == 0.0).any()) throw InvalidParam("alpha_w must be nonzero");
  PackedBitTensor out(Shape4{s.d0, s.d2, s.d3, s.d1});
  for (int n = 0; n < s.d0; ++n)
    for (int c = 0; c < s.d1; ++c)
      for (int ky = 0; ky < s.d2; ++ky)
        for (int kx = 0; kx < s.d3; ++kx) {
          const int sa = sign_of(alpha.at(n, c, ky, kx, s.d1, s.d2));
          const int sw = sign_of(jitter_zero(weight(n, c, ky, kx)));
          out.set_bit(n, ky, kx, c, sa * sw > 0);
        }
  return out;
}

FoldedAffine fold_batchnorm(const Eigen::ArrayXd& gamma,
                            const Eigen::ArrayXd& beta,
                            const Eigen::ArrayXd& tau,
                            const Eigen::ArrayXd& b0) {
  const auto n = tau.size();
  if (gamma.size() != n || beta.size() != n || b0.size() != n)
    throw ShapeError("fold_batchnorm: per-channel sizes differ");
  return {tau * gamma, tau * beta + b0};
}

Eigen::ArrayXd absorb_incoming_scale(const Eigen::ArrayXd& kappa,
                                     const Eigen::ArrayXd& lambda,
                                     const Eigen::ArrayXd& gamma) {
  if (lambda.size() != gamma.size())
    throw ShapeError("absorb_incoming_scale: lambda has " +
                     std::to_string(lambda.size()) + " channels, gamma has " +
                     std::to_string(gamma.size()));
  if (kappa.size() == 1) return gamma * (kappa[0] * lambda);
  if (kappa.size() != gamma.size())
    throw ShapeError("absorb_incoming_scale: kappa has " +
                     std::to_string(kappa.size()) + " entries, expected 1 or " +
                     std::to_string(gamma.size()));
  return gamma * (kappa * lambda);
}

Threshold solve_threshold(double tau, double b0, double b1, double slope) {
  if (!std::isfinite(tau) || !std::isfinite(b0) || !std::isfinite(b1) ||
      !std::isfinite(slope))
    throw InvalidParam("solve_threshold: non-finite parameter");
  if (tau == 0.0)
    throw DegenerateChannel("solve_threshold: folded tau is zero");
  if (slope <= 0.0) throw InvalidParam("solve_threshold: prelu slope must be > 0");
  const double crossing = b1 <= 0.0 ? -b1 : -b1 / slope;
  return {(crossing - b0) / tau, tau > 0.0 ? Direction::GE : Direction::LE};
}

std::int32_t integerize_threshold(double theta, Direction direction) {
  if (std::isnan(theta)) throw InvalidParam("integerize_threshold: NaN theta");
  constexpr double kLimit = 1 << 30;
  const double t = direction == Direction::GE ? std::ceil(theta) : std::floor(theta);
  return static_cast<std::int32_t>(std::clamp(t, -kLimit, kLimit));
}

ChannelThresholds fuse_activation(const ActivationParams& act,
                                  const Eigen::ArrayXd& input_scale) {
  act.validate();
  const int n = act.channels();
  const Eigen::ArrayXd gamma =
      absorb_incoming_scale(input_scale, Eigen::ArrayXd::Ones(n), act.bn_gamma);
  const FoldedAffine f = fold_batchnorm(gamma, act.bn_beta, act.tau, act.b0);
  ChannelThresholds out;
  out.theta.resize(n);
  out.theta_int.resize(n);
  out.direction.resize(n);
  for (int c = 0; c < n; ++c) {
    Threshold t;
    try {
      t = solve_threshold(f.tau[c], f.b0[c], act.b1[c], act.prelu_slope[c]);
    } catch (const DegenerateChannel&) {
      throw DegenerateChannel("channel " + std::to_string(c) +
                              ": folded tau is zero");
    }
    out.theta[c] = t.theta;
    out.direction[c] = t.direction;
    out.theta_int[c] = integerize_threshold(t.theta, t.direction);
  }
  return out;
}

FusedBinaryConvUnit fuse_unit(const OverParamConvUnit& unit,
                              const Eigen::ArrayXd& kappa_in) {
  unit.validate();
  FusedBinaryConvUnit out;
  out.weights = fuse_weights(unit.weight, unit.alpha);
  out.geometry = unit.geometry;
  out.out_kind = unit.out_kind;
  const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(unit.out_channels());
  // Effective scale on the integer accumulator: A_f = kappa * lambda * y.
  const Eigen::ArrayXd accum_scale = absorb_incoming_scale(kappa_in, unit.lambda, ones);
  if (unit.out_kind == OutKind::Bit1) {
    out.threshold = fuse_activation(unit.act, accum_scale);
  } else {
    out.requant_scale = unit.act.bn_gamma * accum_scale / unit.int4_step;
    out.requant_offset = unit.act.bn_beta / unit.int4_step;
    if (!out.requant_scale.isFinite().all() || (out.requant_scale == 0.0).any())
      throw DegenerateChannel("int4 requant scale is zero or non-finite");
  }
  return out;
}

FusedBinaryConvUnit fuse_unit(const OverParamConvUnit& unit, double kappa_in) {
  return fuse_unit(unit, Eigen::ArrayXd::Constant(1, kappa_in));
}

FusedBiNealBlock fuse_block(const BiNealBlockParams& block, double kappa_in) {
  block.validate();
  FusedBiNealBlock out;
  out.conv1 = fuse_unit(block.conv1, kappa_in);
  out.conv2 = fuse_unit(block.conv2, block.conv1.act.kappa);
  out.skip = fuse_unit(block.skip, kappa_in);
  out.output =
      fuse_activation(block.output, Eigen::ArrayXd::Ones(block.output.channels()));
  return out;
}

}  // namespace bnn
