// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

#include "bnn/tensor.hpp"

namespace bnn {

using Word = std::uint64_t;
inline constexpr int kWordBits = 64;

inline constexpr int words_for(int channels) {
  return (channels + kWordBits - 1) / kWordBits;
}

/// Mask selecting the valid bits of word `w` of a `channels`-bit row.
inline constexpr Word valid_mask(int channels, int w) {
  const int rem = channels - w * kWordBits;
  return rem >= kWordBits ? ~Word{0} : ((Word{1} << rem) - 1);
}

/// NHWC tensor of ±1 values, one bit per element: 1 is +1, 0 is -1.
/// Channels are packed LSB-first into 64-bit words; each pixel owns
/// words_for(C) words and the tail bits past C are always 0.
class PackedBitTensor {
 public:
  PackedBitTensor() = default;
  /// All elements -1.
  explicit PackedBitTensor(Shape4 shape);
  PackedBitTensor(Shape4 shape, std::vector<Word> words);

  const Shape4& shape() const { return shape_; }
  int batch() const { return shape_.d0; }
  int height() const { return shape_.d1; }
  int width() const { return shape_.d2; }
  int channels() const { return shape_.d3; }
  int words_per_pixel() const { return words_per_pixel_; }

  std::span<const Word> pixel(int b, int y, int x) const {
    return {words_.data() + pixel_offset(b, y, x),
            static_cast<std::size_t>(words_per_pixel_)};
  }
  std::span<Word> pixel(int b, int y, int x) {
    return {words_.data() + pixel_offset(b, y, x),
            static_cast<std::size_t>(words_per_pixel_)};
  }

  bool bit(int b, int y, int x, int c) const {
    return (pixel(b, y, x)[c / kWordBits] >> (c % kWordBits)) & 1U;
  }
  void set_bit(int b, int y, int x, int c, bool value);
  int sign(int b, int y, int x, int c) const {
    return bit(b, y, x, c) ? 1 : -1;
  }

  const std::vector<Word>& words() const { return words_; }

  /// True when every tail bit past the channel count is zero.
  bool padding_clear() const;

  friend bool operator==(const PackedBitTensor&,
                         const PackedBitTensor&) = default;

 private:
  std::size_t pixel_offset(int b, int y, int x) const {
    return ((static_cast<std::size_t>(b) * shape_.d1 + y) * shape_.d2 + x) *
           words_per_pixel_;
  }

  Shape4 shape_;
  int words_per_pixel_ = 0;
  std::vector<Word> words_;
};

/// NHWC tensor of signed 4-bit integers, two per byte, channel-fastest,
/// low nibble first.
class Int4Tensor {
 public:
  static constexpr int kMin = -8;
  static constexpr int kMax = 7;

  Int4Tensor() = default;
  explicit Int4Tensor(Shape4 shape);

  const Shape4& shape() const { return shape_; }
  std::int64_t size() const { return shape_.size(); }

  int get(std::int64_t flat) const;
  void set(std::int64_t flat, int value);
  int at(int b, int y, int x, int c) const { return get(flat(b, y, x, c)); }
  void set(int b, int y, int x, int c, int value) {
    set(flat(b, y, x, c), value);
  }
  std::int64_t flat(int b, int y, int x, int c) const {
    return ((std::int64_t{b} * shape_.d1 + y) * shape_.d2 + x) * shape_.d3 + c;
  }

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  static Int4Tensor from_bytes(Shape4 shape, std::vector<std::uint8_t> bytes);

  friend bool operator==(const Int4Tensor&, const Int4Tensor&) = default;

 private:
  Shape4 shape_;
  std::vector<std::uint8_t> bytes_;
};

/// Raw integer convolution accumulators, NHWC with N output channels.
using AccumTensor = Tensor<std::int32_t>;

/// Packs a ±1 tensor. Throws InvalidValue for any element other than ±1.
template <typename Scalar>
PackedBitTensor pack(const Tensor<Scalar>& signs);

SignTensor unpack(const PackedBitTensor& packed);

/// Round half to even.
double round_half_even(double v);

/// clamp(round_half_even(scale * v + offset), -8, 7).
int quantize_int4(double v, double scale, double offset);

/// Per-channel INT4 requantization of accumulators.
Int4Tensor to_int4(const AccumTensor& acc, const Eigen::ArrayXd& scale,
                   const Eigen::ArrayXd& offset);

}  // namespace bnn
