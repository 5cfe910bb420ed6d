// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnn/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <thread>
#include <vector>

namespace bnn {

namespace {

int scaled(int base, double m) {
  return static_cast<int>(std::llround(base * m));
}

int popcount_agree(std::span<const Word> a, std::span<const Word> w,
                   int channels) {
  int agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    agree += std::popcount(~(a[i] ^ w[i]) &
                           valid_mask(channels, static_cast<int>(i)));
  return agree;
}

// Splits [0, rows) into contiguous chunks, one per worker.
template <typename Fn>
void parallel_rows(int rows, int threads, Fn&& fn) {
  threads = std::clamp(threads, 1, std::max(rows, 1));
  if (threads == 1) {
    for (int r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int begin = rows * t / threads, end = rows * (t + 1) / threads;
    pool.emplace_back([begin, end, &fn] {
      for (int r = begin; r < end; ++r) fn(r);
    });
  }
}

}  // namespace

int BlockSpec::in_channels() const {
  return kind == BlockKind::BiNeal && scale_input ? scaled(cin, multiplier) : cin;
}

int BlockSpec::out_channels() const {
  return kind == BlockKind::BiNeal ? scaled(cout, multiplier) : cout;
}

std::int32_t xnor_dot(std::span<const Word> a, std::span<const Word> w,
                      int length) {
  if (a.size() != w.size())
    throw ShapeError("xnor_dot: packed lengths " + std::to_string(a.size()) +
                     " and " + std::to_string(w.size()) + " differ");
  if (length < 0 || words_for(length) != static_cast<int>(a.size()))
    throw ShapeError("xnor_dot: length " + std::to_string(length) +
                     " does not fit " + std::to_string(a.size()) + " words");
  return 2 * popcount_agree(a, w, length) - length;
}

AccumTensor binary_conv(const PackedBitTensor& x, const PackedBitTensor& weights,
                        ConvGeometry g, const ExecOptions& opts) {
  const int channels = x.channels();
  if (weights.channels() != channels)
    throw ShapeError("binary_conv: weights expect " +
                     std::to_string(weights.channels()) +
                     " input channels, input has " + std::to_string(channels));
  if (weights.height() != g.kernel || weights.width() != g.kernel)
    throw ShapeError("binary_conv: weight kernel does not match geometry");
  const int ho = g.out_extent(x.height()), wo = g.out_extent(x.width());
  if (ho <= 0 || wo <= 0) throw ShapeError("binary_conv: empty output");
  const int n_out = weights.batch();
  const int length = channels * g.kernel * g.kernel;
  const std::vector<Word> padding(static_cast<std::size_t>(x.words_per_pixel()), 0);
  const std::span<const Word> pad_px(padding);

  AccumTensor out(Shape4{x.batch(), ho, wo, n_out});
  parallel_rows(x.batch() * ho, opts.threads, [&](int row) {
    const int b = row / ho, oy = row % ho;
    for (int ox = 0; ox < wo; ++ox)
      for (int n = 0; n < n_out; ++n) {
        int agree = 0;
        for (int ky = 0; ky < g.kernel; ++ky) {
          const int iy = oy * g.stride - g.padding + ky;
          for (int kx = 0; kx < g.kernel; ++kx) {
            const int ix = ox * g.stride - g.padding + kx;
            const bool inside =
                iy >= 0 && iy < x.height() && ix >= 0 && ix < x.width();
            agree += popcount_agree(inside ? x.pixel(b, iy, ix) : pad_px,
                                    weights.pixel(n, ky, kx), channels);
          }
        }
        out(b, oy, ox, n) = 2 * agree - length;
      }
  });
  return out;
}

AccumTensor binary_conv(const PackedBitTensor& x, const FusedBinaryConvUnit& unit,
                        const ExecOptions& opts) {
  return binary_conv(x, unit.weights, unit.geometry, opts);
}

namespace {

template <typename Decide>
PackedBitTensor threshold_generic(Shape4 s, int thresholds, Decide&& decide) {
  if (thresholds != s.d3)
    throw ShapeError("threshold_sign: " + std::to_string(thresholds) +
                     " thresholds for " + std::to_string(s.d3) + " channels");
  PackedBitTensor out(s);
  for (int b = 0; b < s.d0; ++b)
    for (int y = 0; y < s.d1; ++y)
      for (int x = 0; x < s.d2; ++x) {
        auto px = out.pixel(b, y, x);
        for (int c = 0; c < s.d3; ++c)
          if (decide(b, y, x, c)) px[c / kWordBits] |= Word{1} << (c % kWordBits);
      }
  return out;
}

}  // namespace

PackedBitTensor threshold_sign(const AccumTensor& acc, const ChannelThresholds& t) {
  return threshold_generic(acc.shape(), t.channels(), [&](int b, int y, int x, int c) {
    return t.fires(c, acc(b, y, x, c));
  });
}

PackedBitTensor threshold_sign(const Int4Tensor& q, const ChannelThresholds& t) {
  return threshold_generic(q.shape(), t.channels(), [&](int b, int y, int x, int c) {
    return t.fires(c, q.at(b, y, x, c));
  });
}

PackedBitTensor threshold_sign(const RealTensor& v, const ChannelThresholds& t) {
  return threshold_generic(v.shape(), t.channels(), [&](int b, int y, int x, int c) {
    return t.fires_real(c, v(b, y, x, c));
  });
}

Int4Tensor eltwise_add_int4(const Int4Tensor& a, const Int4Tensor& b) {
  if (!(a.shape() == b.shape()))
    throw ShapeError("eltwise_add_int4: shapes " + a.shape().str() + " and " +
                     b.shape().str() + " differ");
  Int4Tensor out(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i)
    out.set(i, std::clamp(a.get(i) + b.get(i), Int4Tensor::kMin, Int4Tensor::kMax));
  return out;
}

PackedBitTensor run_unit_bits(const FusedBinaryConvUnit& unit,
                              const PackedBitTensor& x, const ExecOptions& opts) {
  if (unit.out_kind != OutKind::Bit1)
    throw InvalidParam("run_unit_bits on an int4-output unit");
  return threshold_sign(binary_conv(x, unit, opts), unit.threshold);
}

Int4Tensor run_unit_int4(const FusedBinaryConvUnit& unit, const PackedBitTensor& x,
                         const ExecOptions& opts) {
  if (unit.out_kind != OutKind::Int4)
    throw InvalidParam("run_unit_int4 on a bit1-output unit");
  return to_int4(binary_conv(x, unit, opts), unit.requant_scale,
                 unit.requant_offset);
}

PackedBitTensor run_block(const FusedBiNealBlock& block, const PackedBitTensor& x,
                          const ExecOptions& opts) {
  const PackedBitTensor h = run_unit_bits(block.conv1, x, opts);
  const Int4Tensor main = run_unit_int4(block.conv2, h, opts);
  const Int4Tensor shortcut = run_unit_int4(block.skip, x, opts);
  return threshold_sign(eltwise_add_int4(main, shortcut), block.output);
}

}  // namespace bnn
