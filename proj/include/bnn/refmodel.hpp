// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bnn/bitpack.hpp"
#include "bnn/tensor.hpp"

namespace bnn {

enum class OutKind { Bit1, Int4 };

/// Per-weight binarization sharpness, broadcast over N, N x C or
/// N x C x K x K.
struct WeightSharpness {
  enum class Layout { PerOutput, PerOutputInput, PerElement };

  Layout layout = Layout::PerOutput;
  Eigen::ArrayXd values;

  double at(int n, int c, int ky, int kx, int in_channels, int kernel) const {
    switch (layout) {
      case Layout::PerOutput:
        return values[n];
      case Layout::PerOutputInput:
        return values[std::int64_t{n} * in_channels + c];
      case Layout::PerElement:
        break;
    }
    return values[((std::int64_t{n} * in_channels + c) * kernel + ky) * kernel +
                  kx];
  }
  static std::int64_t expected_size(Layout layout, int n, int c, int k);
};

/// Auxiliary parameters of one activation binarization, per channel:
///   A_b = Sign(Htanh(PReLU(tau * BN(A_f) + b0) + b1)),  BN(x) = gamma*x + beta
/// with A_f ~ kappa * A_b on the way out.
struct ActivationParams {
  Eigen::ArrayXd bn_gamma, bn_beta, tau, b0, b1, prelu_slope;
  double kappa = 1.0;

  int channels() const { return static_cast<int>(tau.size()); }
  /// Sizes agree, everything finite, prelu_slope > 0. A zero tau raises
  /// DegenerateChannel.
  void validate() const;
  /// gamma=1, beta=0, tau=1, b0=b1=0.
  static ActivationParams neutral(int channels, double prelu_slope = 0.25);
};

/// Training-form conv + binarization unit.
struct OverParamConvUnit {
  RealTensor weight;  // N x C x K x K
  WeightSharpness alpha;
  Eigen::ArrayXd lambda;
  /// Bit1 units use all fields; Int4 units use only bn_gamma / bn_beta and
  /// kappa is ignored.
  ActivationParams act;
  /// Int4 units: fake-quant step, q = clamp(round(BN(A_f) / step)).
  Eigen::ArrayXd int4_step;
  ConvGeometry geometry;
  OutKind out_kind = OutKind::Bit1;

  int out_channels() const { return weight.shape().d0; }
  int in_channels() const { return weight.shape().d1; }
  int kernel() const { return weight.shape().d2; }
  void validate() const;
};

/// conv1 -> 1-bit, conv2 -> INT4, skip conv -> INT4, saturating add,
/// then a per-channel binarization of the INT4 sum.
struct BiNealBlockParams {
  OverParamConvUnit conv1;
  OverParamConvUnit conv2;
  OverParamConvUnit skip;
  ActivationParams output;

  void validate() const;
};

/// Sign with Sign(0) = +1.
template <typename Scalar>
int sign_of(Scalar v) {
  return v >= Scalar(0) ? 1 : -1;
}

template <typename Scalar>
Scalar htanh(Scalar v) {
  return std::clamp(v, Scalar(-1), Scalar(1));
}

template <typename Scalar>
Scalar prelu(Scalar v, Scalar slope) {
  return v > Scalar(0) ? v : slope * v;
}

/// Exact zeros become +epsilon so Sign(Tanh(alpha * w)) and
/// Sign(alpha) * Sign(w) agree on every element.
inline double jitter_zero(double w) {
  return w == 0.0 ? std::numeric_limits<double>::epsilon() : w;
}

/// Cross-correlation of NHWC input with NCKK weights. Out-of-range taps
/// read `pad_value`.
template <typename Scalar>
Tensor<Scalar> ref_conv(const Tensor<Scalar>& weight, const Tensor<Scalar>& x,
                        ConvGeometry g, Scalar pad_value = Scalar(0)) {
  const Shape4 ws = weight.shape();
  const Shape4 xs = x.shape();
  if (ws.d1 != xs.d3)
    throw ShapeError("ref_conv: weight expects " + std::to_string(ws.d1) +
                     " input channels, got " + std::to_string(xs.d3));
  if (ws.d2 != g.kernel || ws.d3 != g.kernel)
    throw ShapeError("ref_conv: weight kernel does not match geometry");
  const int ho = g.out_extent(xs.d1), wo = g.out_extent(xs.d2);
  if (ho <= 0 || wo <= 0) throw ShapeError("ref_conv: empty output");
  Tensor<Scalar> out(Shape4{xs.d0, ho, wo, ws.d0});
  for (int b = 0; b < xs.d0; ++b)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox)
        for (int n = 0; n < ws.d0; ++n) {
          Scalar acc(0);
          for (int ky = 0; ky < g.kernel; ++ky) {
            const int iy = oy * g.stride - g.padding + ky;
            for (int kx = 0; kx < g.kernel; ++kx) {
              const int ix = ox * g.stride - g.padding + kx;
              const bool inside = iy >= 0 && iy < xs.d1 && ix >= 0 && ix < xs.d2;
              for (int c = 0; c < xs.d3; ++c)
                acc += weight(n, c, ky, kx) * (inside ? x(b, iy, ix, c) : pad_value);
            }
          }
          out(b, oy, ox, n) = acc;
        }
  return out;
}

struct BinarizedWeight {
  SignTensor binary;  // N x C x K x K, Sign(Tanh(alpha * W_f))
  RealTensor approx;  // lambda(n) * binary
};

BinarizedWeight ref_binarize_weight(const RealTensor& weight,
                                    const WeightSharpness& alpha,
                                    const Eigen::ArrayXd& lambda);

/// tau * BN(a) + b0 through PReLU, plus b1; the value whose sign is taken.
double ref_presign(double a, const ActivationParams& act, int channel);

int ref_binarize_scalar(double a, const ActivationParams& act, int channel);

SignTensor ref_binarize_activation(const RealTensor& a,
                                   const ActivationParams& act);

/// A_f of a unit fed with kappa_in * x, padding -kappa_in.
RealTensor ref_unit_preactivation(const OverParamConvUnit& unit,
                                  const SignTensor& x, double kappa_in);

SignTensor ref_unit_bits(const OverParamConvUnit& unit, const SignTensor& x,
                         double kappa_in);
Int4Tensor ref_unit_int4(const OverParamConvUnit& unit, const SignTensor& x,
                         double kappa_in);

/// Binarization of an INT4 tensor (or any integer codes) through `act`.
SignTensor ref_binarize_int4(const Int4Tensor& q, const ActivationParams& act);

Int4Tensor saturating_add(const Int4Tensor& a, const Int4Tensor& b);

SignTensor ref_block_forward(const BiNealBlockParams& block, const SignTensor& x,
                             double kappa_in);

}  // namespace bnn
