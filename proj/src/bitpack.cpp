// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnn/bitpack.hpp"

#include <algorithm>
#include <cmath>

namespace bnn {

PackedBitTensor::PackedBitTensor(Shape4 shape)
    : shape_(shape), words_per_pixel_(words_for(shape.d3)) {
  if (shape.d0 < 0 || shape.d1 < 0 || shape.d2 < 0 || shape.d3 < 0)
    throw ShapeError("negative tensor extent " + shape.str());
  words_.assign(static_cast<std::size_t>(shape.d0) * shape.d1 * shape.d2 *
                    words_per_pixel_,
                Word{0});
}

PackedBitTensor::PackedBitTensor(Shape4 shape, std::vector<Word> words)
    : PackedBitTensor(shape) {
  if (words.size() != words_.size())
    throw ShapeError("packed word count does not match " + shape.str());
  words_ = std::move(words);
  if (!padding_clear())
    throw InvalidValue("packed tensor has nonzero channel padding bits");
}

void PackedBitTensor::set_bit(int b, int y, int x, int c, bool value) {
  Word& w = pixel(b, y, x)[c / kWordBits];
  const Word m = Word{1} << (c % kWordBits);
  w = value ? (w | m) : (w & ~m);
}

bool PackedBitTensor::padding_clear() const {
  if (words_per_pixel_ == 0) return true;
  const Word tail = ~valid_mask(shape_.d3, words_per_pixel_ - 1);
  for (std::size_t i = words_per_pixel_ - 1; i < words_.size();
       i += words_per_pixel_)
    if (words_[i] & tail) return false;
  return true;
}

template <typename Scalar>
PackedBitTensor pack(const Tensor<Scalar>& signs) {
  PackedBitTensor out(signs.shape());
  const Shape4 s = signs.shape();
  for (int b = 0; b < s.d0; ++b)
    for (int y = 0; y < s.d1; ++y)
      for (int x = 0; x < s.d2; ++x) {
        auto px = out.pixel(b, y, x);
        for (int c = 0; c < s.d3; ++c) {
          const Scalar v = signs(b, y, x, c);
          if (v == Scalar(1))
            px[c / kWordBits] |= Word{1} << (c % kWordBits);
          else if (v != Scalar(-1))
            throw InvalidValue("pack: element at (" + std::to_string(b) + "," +
                               std::to_string(y) + "," + std::to_string(x) +
                               "," + std::to_string(c) + ") is not +1 or -1");
        }
      }
  return out;
}

template PackedBitTensor pack(const Tensor<std::int8_t>&);
template PackedBitTensor pack(const Tensor<std::int32_t>&);
template PackedBitTensor pack(const Tensor<float>&);
template PackedBitTensor pack(const Tensor<double>&);

SignTensor unpack(const PackedBitTensor& packed) {
  SignTensor out(packed.shape());
  const Shape4 s = packed.shape();
  for (int b = 0; b < s.d0; ++b)
    for (int y = 0; y < s.d1; ++y)
      for (int x = 0; x < s.d2; ++x)
        for (int c = 0; c < s.d3; ++c)
          out(b, y, x, c) = static_cast<std::int8_t>(packed.sign(b, y, x, c));
  return out;
}

Int4Tensor::Int4Tensor(Shape4 shape)
    : shape_(shape), bytes_(static_cast<std::size_t>((shape.size() + 1) / 2)) {}

int Int4Tensor::get(std::int64_t i) const {
  const std::uint8_t byte = bytes_[static_cast<std::size_t>(i / 2)];
  const int nib = (i % 2 == 0) ? (byte & 0x0F) : (byte >> 4);
  return nib >= 8 ? nib - 16 : nib;
}

void Int4Tensor::set(std::int64_t i, int value) {
  if (value < kMin || value > kMax)
    throw InvalidValue("int4 value out of range: " + std::to_string(value));
  std::uint8_t& byte = bytes_[static_cast<std::size_t>(i / 2)];
  const auto nib = static_cast<std::uint8_t>(value & 0x0F);
  byte = (i % 2 == 0) ? static_cast<std::uint8_t>((byte & 0xF0) | nib)
                      : static_cast<std::uint8_t>((byte & 0x0F) | (nib << 4));
}

Int4Tensor Int4Tensor::from_bytes(Shape4 shape,
                                  std::vector<std::uint8_t> bytes) {
  Int4Tensor t(shape);
  if (bytes.size() != t.bytes_.size())
    throw ShapeError("int4 byte count does not match " + shape.str());
  t.bytes_ = std::move(bytes);
  return t;
}

double round_half_even(double v) { return std::nearbyint(v); }

int quantize_int4(double v, double scale, double offset) {
  const double r = round_half_even(scale * v + offset);
  return static_cast<int>(std::clamp(r, double{Int4Tensor::kMin},
                                     double{Int4Tensor::kMax}));
}

Int4Tensor to_int4(const AccumTensor& acc, const Eigen::ArrayXd& scale,
                   const Eigen::ArrayXd& offset) {
  const Shape4 s = acc.shape();
  if (scale.size() != s.d3 || offset.size() != s.d3)
    throw ShapeError("to_int4: per-channel parameter count " +
                     std::to_string(scale.size()) + "/" +
                     std::to_string(offset.size()) + " != channels " +
                     std::to_string(s.d3));
  if (!scale.isFinite().all() || !offset.isFinite().all() ||
      (scale == 0.0).any())
    throw InvalidParam("to_int4: scale must be finite and nonzero, offset finite");
  Int4Tensor out(s);
  const std::int64_t n = acc.size();
  for (std::int64_t i = 0; i < n; ++i) {
    const auto c = static_cast<Eigen::Index>(i % s.d3);
    out.set(i, quantize_int4(acc.array()[i], scale[c], offset[c]));
  }
  return out;
}

}  // namespace bnn
