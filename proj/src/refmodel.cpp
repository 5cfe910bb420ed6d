// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnn/refmodel.hpp"

#include <cmath>

namespace bnn {

namespace {

void require_size(const Eigen::ArrayXd& a, int n, const char* what) {
  if (a.size() != n)
    throw ShapeError(std::string(what) + " has " + std::to_string(a.size()) +
                     " entries, expected " + std::to_string(n));
}

void require_finite(const Eigen::ArrayXd& a, const char* what) {
  if (!a.isFinite().all())
    throw InvalidParam(std::string(what) + " has non-finite entries");
}

}  // namespace

std::int64_t WeightSharpness::expected_size(Layout layout, int n, int c, int k) {
  switch (layout) {
    case Layout::PerOutput:
      return n;
    case Layout::PerOutputInput:
      return std::int64_t{n} * c;
    case Layout::PerElement:
      break;
  }
  return std::int64_t{n} * c * k * k;
}

void ActivationParams::validate() const {
  const int n = channels();
  require_size(bn_gamma, n, "bn_gamma");
  require_size(bn_beta, n, "bn_beta");
  require_size(b0, n, "b0");
  require_size(b1, n, "b1");
  require_size(prelu_slope, n, "prelu_slope");
  for (const auto* a : {&bn_gamma, &bn_beta, &tau, &b0, &b1, &prelu_slope})
    require_finite(*a, "activation parameter");
  if (!std::isfinite(kappa)) throw InvalidParam("kappa is not finite");
  if ((prelu_slope <= 0.0).any())
    throw InvalidParam("prelu_slope must be > 0");
  for (int c = 0; c < n; ++c)
    if (tau[c] == 0.0)
      throw DegenerateChannel("channel " + std::to_string(c) + ": tau is zero");
}

ActivationParams ActivationParams::neutral(int channels, double slope) {
  ActivationParams p;
  p.bn_gamma = Eigen::ArrayXd::Ones(channels);
  p.bn_beta = Eigen::ArrayXd::Zero(channels);
  p.tau = Eigen::ArrayXd::Ones(channels);
  p.b0 = Eigen::ArrayXd::Zero(channels);
  p.b1 = Eigen::ArrayXd::Zero(channels);
  p.prelu_slope = Eigen::ArrayXd::Constant(channels, slope);
  return p;
}

void OverParamConvUnit::validate() const {
  const Shape4 s = weight.shape();
  if (s.d2 != s.d3) throw ShapeError("weight kernel must be square");
  if (s.d2 != geometry.kernel)
    throw ShapeError("weight kernel does not match geometry");
  if (geometry.stride < 1 || geometry.padding < 0)
    throw InvalidParam("invalid stride/padding");
  if (alpha.values.size() !=
      WeightSharpness::expected_size(alpha.layout, s.d0, s.d1, s.d2))
    throw ShapeError("alpha_w size does not match its layout");
  require_finite(alpha.values, "alpha_w");
  if ((alpha.values == 0.0).any()) throw InvalidParam("alpha_w must be nonzero");
  require_size(lambda, s.d0, "lambda");
  require_finite(lambda, "lambda");
  require_finite(weight.array(), "weight");
  if (out_kind == OutKind::Bit1) {
    require_size(act.tau, s.d0, "tau");
    act.validate();
  } else {
    require_size(act.bn_gamma, s.d0, "bn_gamma");
    require_size(act.bn_beta, s.d0, "bn_beta");
    require_finite(act.bn_gamma, "bn_gamma");
    require_finite(act.bn_beta, "bn_beta");
    require_size(int4_step, s.d0, "int4_step");
    require_finite(int4_step, "int4_step");
    if ((int4_step == 0.0).any()) throw InvalidParam("int4_step must be nonzero");
  }
}

void BiNealBlockParams::validate() const {
  conv1.validate();
  conv2.validate();
  skip.validate();
  output.validate();
  if (conv1.out_kind != OutKind::Bit1 || conv2.out_kind != OutKind::Int4 ||
      skip.out_kind != OutKind::Int4)
    throw InvalidParam("BiNeal block expects conv1:bit1, conv2/skip:int4");
  if (conv2.in_channels() != conv1.out_channels())
    throw ShapeError("conv2 input channels != conv1 output channels");
  if (skip.in_channels() != conv1.in_channels())
    throw ShapeError("skip conv input channels != block input channels");
  if (skip.out_channels() != conv2.out_channels() ||
      output.channels() != conv2.out_channels())
    throw ShapeError("block output channel counts disagree");
  if (conv2.geometry.stride != 1)
    throw InvalidParam("conv2 must have stride 1");
  if (skip.geometry.stride != conv1.geometry.stride)
    throw InvalidParam("skip conv stride must match conv1");
}

BinarizedWeight ref_binarize_weight(const RealTensor& weight,
                                    const WeightSharpness& alpha,
                                    const Eigen::ArrayXd& lambda) {
  const Shape4 s = weight.shape();
  if (lambda.size() != s.d0) throw ShapeError("lambda size != out channels");
  if ((alpha.values == 0.0).any()) throw InvalidParam("alpha_w must be nonzero");
  BinarizedWeight out{SignTensor(s), RealTensor(s)};
  for (int n = 0; n < s.d0; ++n)
    for (int c = 0; c < s.d1; ++c)
      for (int ky = 0; ky < s.d2; ++ky)
        for (int kx = 0; kx < s.d3; ++kx) {
          const double a = alpha.at(n, c, ky, kx, s.d1, s.d2);
          const int wb =
              sign_of(std::tanh(a * jitter_zero(weight(n, c, ky, kx))));
          out.binary(n, c, ky, kx) = static_cast<std::int8_t>(wb);
          out.approx(n, c, ky, kx) = lambda[n] * wb;
        }
  return out;
}

double ref_presign(double a, const ActivationParams& act, int n) {
  const double bn = act.bn_gamma[n] * a + act.bn_beta[n];
  const double x = act.tau[n] * bn + act.b0[n];
  return htanh(prelu(x, act.prelu_slope[n]) + act.b1[n]);
}

int ref_binarize_scalar(double a, const ActivationParams& act, int n) {
  return sign_of(ref_presign(a, act, n));
}

SignTensor ref_binarize_activation(const RealTensor& a,
                                   const ActivationParams& act) {
  const Shape4 s = a.shape();
  if (act.channels() != s.d3)
    throw ShapeError("activation parameters do not match channel count");
  SignTensor out(s);
  for (std::int64_t i = 0; i < a.size(); ++i)
    out.array()[i] = static_cast<std::int8_t>(ref_binarize_scalar(
        a.array()[i], act, static_cast<int>(i % s.d3)));
  return out;
}

RealTensor ref_unit_preactivation(const OverParamConvUnit& unit,
                                  const SignTensor& x, double kappa_in) {
  const BinarizedWeight w =
      ref_binarize_weight(unit.weight, unit.alpha, unit.lambda);
  const RealTensor scaled_x(x.shape(), x.array().cast<double>() * kappa_in);
  return ref_conv(w.approx, scaled_x, unit.geometry, -kappa_in);
}

SignTensor ref_unit_bits(const OverParamConvUnit& unit, const SignTensor& x,
                         double kappa_in) {
  if (unit.out_kind != OutKind::Bit1)
    throw InvalidParam("ref_unit_bits on an int4-output unit");
  return ref_binarize_activation(ref_unit_preactivation(unit, x, kappa_in),
                                 unit.act);
}

Int4Tensor ref_unit_int4(const OverParamConvUnit& unit, const SignTensor& x,
                         double kappa_in) {
  if (unit.out_kind != OutKind::Int4)
    throw InvalidParam("ref_unit_int4 on a bit1-output unit");
  const RealTensor a = ref_unit_preactivation(unit, x, kappa_in);
  const Shape4 s = a.shape();
  Int4Tensor out(s);
  for (std::int64_t i = 0; i < a.size(); ++i) {
    const auto n = static_cast<Eigen::Index>(i % s.d3);
    const double v = unit.act.bn_gamma[n] * a.array()[i] + unit.act.bn_beta[n];
    out.set(i, quantize_int4(v, 1.0 / unit.int4_step[n], 0.0));
  }
  return out;
}

SignTensor ref_binarize_int4(const Int4Tensor& q, const ActivationParams& act) {
  const Shape4 s = q.shape();
  if (act.channels() != s.d3)
    throw ShapeError("activation parameters do not match channel count");
  SignTensor out(s);
  for (std::int64_t i = 0; i < q.size(); ++i)
    out.array()[i] = static_cast<std::int8_t>(
        ref_binarize_scalar(q.get(i), act, static_cast<int>(i % s.d3)));
  return out;
}

Int4Tensor saturating_add(const Int4Tensor& a, const Int4Tensor& b) {
  if (!(a.shape() == b.shape()))
    throw ShapeError("int4 add: shapes " + a.shape().str() + " and " +
                     b.shape().str() + " differ");
  Int4Tensor out(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i)
    out.set(i, std::clamp(a.get(i) + b.get(i), Int4Tensor::kMin,
                          Int4Tensor::kMax));
  return out;
}

SignTensor ref_block_forward(const BiNealBlockParams& block, const SignTensor& x,
                             double kappa_in) {
  block.validate();
  const SignTensor h = ref_unit_bits(block.conv1, x, kappa_in);
  const Int4Tensor main = ref_unit_int4(block.conv2, h, block.conv1.act.kappa);
  const Int4Tensor shortcut = ref_unit_int4(block.skip, x, kappa_in);
  return ref_binarize_int4(saturating_add(main, shortcut), block.output);
}

}  // namespace bnn
