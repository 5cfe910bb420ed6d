// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bnn/bitpack.hpp"
#include "bnn/graph.hpp"

namespace bnn {

/// Element type of a stored blob. Codes are part of the file formats.
enum class DType : std::uint32_t { F32 = 1, F64 = 2, I32 = 3, Bits = 4, U8 = 5, Int4 = 6 };

const char* to_string(DType t);
/// Bytes per storage word: 8 for packed bits, 1 for nibble-packed int4.
int word_size(DType t);

/// Named little-endian tensor payload.
struct Blob {
  DType dtype = DType::F32;
  std::vector<std::int64_t> dims;
  std::vector<std::uint8_t> data;

  std::int64_t elements() const;

  static Blob f32(const Eigen::ArrayXd& v, std::vector<std::int64_t> dims = {});
  static Blob f64(const Eigen::ArrayXd& v, std::vector<std::int64_t> dims = {});
  static Blob i32(const std::vector<std::int32_t>& v);
  static Blob u8(const std::vector<std::uint8_t>& v);
  static Blob bits(const PackedBitTensor& t);

  /// F32 or F64 contents widened to double.
  Eigen::ArrayXd reals() const;
  std::vector<std::int32_t> ints() const;
  PackedBitTensor packed() const;

  friend bool operator==(const Blob&, const Blob&) = default;
};

enum class ModelKind : std::uint32_t { Training = 1, Fused = 2 };

const char* to_string(ModelKind k);

/// Graph plus its parameters, keyed "<layer>.<param>".
struct Model {
  ModelKind kind = ModelKind::Training;
  GraphSpec graph;
  std::map<std::string, Blob> tensors;

  bool has(const std::string& name) const { return tensors.count(name) != 0; }
  const Blob& at(const std::string& name) const;
  Eigen::ArrayXd reals(const std::string& name) const { return at(name).reals(); }

  /// Graph is valid, every required parameter is present with the right
  /// size, and no blob is left unreferenced.
  void validate() const;

  friend bool operator==(const Model&, const Model&) = default;
};

/// Parameter names a layer needs in a model of the given kind.
std::vector<std::string> required_params(const Layer& l, ModelKind kind);

inline constexpr std::uint32_t kContainerVersion = 1;

std::vector<std::uint8_t> serialize_model(const Model& m);
Model parse_model(const std::vector<std::uint8_t>& bytes);
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace bnn
