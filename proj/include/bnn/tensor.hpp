// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>

#include "bnn/errors.hpp"

namespace bnn {

/// Four extents of a dense tensor. For activations the order is
/// (batch, height, width, channels); for convolution weights it is
/// (out channels, in channels, kernel, kernel).
struct Shape4 {
  int d0 = 0, d1 = 0, d2 = 0, d3 = 0;

  std::int64_t size() const {
    return std::int64_t{d0} * d1 * d2 * d3;
  }
  friend bool operator==(const Shape4&, const Shape4&) = default;
  std::string str() const;
};

inline std::string Shape4::str() const {
  return "[" + std::to_string(d0) + "," + std::to_string(d1) + "," +
         std::to_string(d2) + "," + std::to_string(d3) + "]";
}

/// Dense row-major 4-D tensor over an Eigen array. Used NHWC for
/// activations and NCKK for real weights.
template <typename Scalar>
class Tensor {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Tensor() = default;
  explicit Tensor(Shape4 shape, Scalar fill = Scalar(0))
      : shape_(shape), data_(Array::Constant(shape.size(), fill)) {
    if (shape.d0 < 0 || shape.d1 < 0 || shape.d2 < 0 || shape.d3 < 0)
      throw ShapeError("negative tensor extent " + shape.str());
  }
  Tensor(Shape4 shape, Array data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size())
      throw ShapeError("tensor data size does not match " + shape_.str());
  }

  const Shape4& shape() const { return shape_; }
  std::int64_t size() const { return data_.size(); }

  std::int64_t index(int i0, int i1, int i2, int i3) const {
    return ((std::int64_t{i0} * shape_.d1 + i1) * shape_.d2 + i2) * shape_.d3 +
           i3;
  }
  Scalar& operator()(int i0, int i1, int i2, int i3) {
    return data_[index(i0, i1, i2, i3)];
  }
  const Scalar& operator()(int i0, int i1, int i2, int i3) const {
    return data_[index(i0, i1, i2, i3)];
  }

  Array& array() { return data_; }
  const Array& array() const { return data_; }

  template <typename To>
  Tensor<To> cast() const {
    return Tensor<To>(shape_, data_.template cast<To>());
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && (a.data_ == b.data_).all();
  }

 private:
  Shape4 shape_;
  Array data_;
};

using RealTensor = Tensor<double>;
/// ±1 activations or weights held as small integers.
using SignTensor = Tensor<std::int8_t>;

/// Square-kernel convolution geometry. Output extent follows
/// (in + 2*padding - kernel) / stride + 1.
struct ConvGeometry {
  int kernel = 3;
  int stride = 1;
  int padding = 1;

  int out_extent(int in) const {
    return (in + 2 * padding - kernel) / stride + 1;
  }
  friend bool operator==(const ConvGeometry&, const ConvGeometry&) = default;
};

/// Geometry with "same"-style padding, kernel / 2.
inline ConvGeometry same_geometry(int kernel, int stride) {
  return ConvGeometry{kernel, stride, kernel / 2};
}

}  // namespace bnn
