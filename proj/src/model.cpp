// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnn/model.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

namespace bnn {

namespace {

constexpr char kMagic[4] = {'B', 'N', 'L', 'M'};
constexpr std::size_t kHeaderSize = 64;

class Writer {
 public:
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v), 8); }
  void bytes(const std::uint8_t* p, std::size_t n) { out.insert(out.end(), p, p + n); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
  }
  std::vector<std::uint8_t> out;

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

class Reader {
 public:
  Reader(const std::uint8_t* p, std::size_t n, std::string what)
      : p_(p), n_(n), what_(std::move(what)) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(le(8)); }
  const std::uint8_t* take(std::size_t n) {
    need(n);
    const std::uint8_t* r = p_ + pos_;
    pos_ += n;
    return r;
  }
  std::string str() {
    const std::uint32_t n = u32();
    const auto* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  bool done() const { return pos_ == n_; }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (n > n_ - pos_)
      throw ParseError(what_ + ": truncated at byte " + std::to_string(pos_));
  }
  std::uint64_t le(int n) {
    const auto* p = take(n);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{p[i]} << (8 * i);
    return v;
  }
  const std::uint8_t* p_;
  std::size_t n_, pos_ = 0;
  std::string what_;
};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= std::uint64_t{p[i]} << (8 * i);
  T v;
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

std::int64_t product(const std::vector<std::int64_t>& dims) {
  std::int64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::int64_t payload_bytes(DType t, const std::vector<std::int64_t>& dims) {
  switch (t) {
    case DType::F32:
    case DType::I32:
      return 4 * product(dims);
    case DType::F64:
      return 8 * product(dims);
    case DType::U8:
      return product(dims);
    case DType::Int4:
      return (product(dims) + 1) / 2;
    case DType::Bits:
      break;
  }
  if (dims.empty()) return 0;
  std::int64_t pixels = 1;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) pixels *= dims[i];
  return 8 * pixels * words_for(static_cast<int>(dims.back()));
}

}  // namespace

const char* to_string(DType t) {
  switch (t) {
    case DType::F32:
      return "f32";
    case DType::F64:
      return "f64";
    case DType::I32:
      return "i32";
    case DType::Bits:
      return "bits";
    case DType::U8:
      return "u8";
    case DType::Int4:
      break;
  }
  return "int4";
}

int word_size(DType t) {
  switch (t) {
    case DType::F32:
    case DType::I32:
      return 4;
    case DType::F64:
    case DType::Bits:
      return 8;
    case DType::U8:
    case DType::Int4:
      break;
  }
  return 1;
}

const char* to_string(ModelKind k) { return k == ModelKind::Training ? "training" : "fused"; }

std::int64_t Blob::elements() const { return product(dims); }

Blob Blob::f32(const Eigen::ArrayXd& v, std::vector<std::int64_t> dims) {
  Blob b{DType::F32, dims.empty() ? std::vector<std::int64_t>{v.size()} : std::move(dims), {}};
  if (b.elements() != v.size()) throw ShapeError("blob dims do not match element count");
  for (Eigen::Index i = 0; i < v.size(); ++i) put_le(b.data, static_cast<float>(v[i]));
  return b;
}

Blob Blob::f64(const Eigen::ArrayXd& v, std::vector<std::int64_t> dims) {
  Blob b{DType::F64, dims.empty() ? std::vector<std::int64_t>{v.size()} : std::move(dims), {}};
  if (b.elements() != v.size()) throw ShapeError("blob dims do not match element count");
  for (Eigen::Index i = 0; i < v.size(); ++i) put_le(b.data, v[i]);
  return b;
}

Blob Blob::i32(const std::vector<std::int32_t>& v) {
  Blob b{DType::I32, {static_cast<std::int64_t>(v.size())}, {}};
  for (auto x : v) put_le(b.data, x);
  return b;
}

Blob Blob::u8(const std::vector<std::uint8_t>& v) {
  return Blob{DType::U8, {static_cast<std::int64_t>(v.size())}, v};
}

Blob Blob::bits(const PackedBitTensor& t) {
  const Shape4 s = t.shape();
  Blob b{DType::Bits, {s.d0, s.d1, s.d2, s.d3}, {}};
  for (Word w : t.words()) put_le(b.data, w);
  return b;
}

Eigen::ArrayXd Blob::reals() const {
  const std::int64_t n = elements();
  Eigen::ArrayXd v(n);
  if (dtype == DType::F32) {
    for (std::int64_t i = 0; i < n; ++i) v[i] = get_le<float>(data.data() + 4 * i);
  } else if (dtype == DType::F64) {
    for (std::int64_t i = 0; i < n; ++i) v[i] = get_le<double>(data.data() + 8 * i);
  } else {
    throw InvalidParam(std::string("expected a real blob, got ") + to_string(dtype));
  }
  return v;
}

std::vector<std::int32_t> Blob::ints() const {
  if (dtype != DType::I32)
    throw InvalidParam(std::string("expected an i32 blob, got ") + to_string(dtype));
  std::vector<std::int32_t> v(elements());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = get_le<std::int32_t>(data.data() + 4 * i);
  return v;
}

PackedBitTensor Blob::packed() const {
  if (dtype != DType::Bits || dims.size() > 4 || dims.empty())
    throw InvalidParam("expected a packed-bit blob of rank 1..4");
  Shape4 s{1, 1, 1, 1};
  int* ext[4] = {&s.d0, &s.d1, &s.d2, &s.d3};
  for (std::size_t i = 0; i < dims.size(); ++i)
    *ext[4 - dims.size() + i] = static_cast<int>(dims[i]);
  std::vector<Word> words(data.size() / 8);
  for (std::size_t i = 0; i < words.size(); ++i) words[i] = get_le<Word>(data.data() + 8 * i);
  return PackedBitTensor(s, std::move(words));
}

const Blob& Model::at(const std::string& name) const {
  const auto it = tensors.find(name);
  if (it == tensors.end()) throw GraphError("missing parameter '" + name + "'");
  return it->second;
}

std::vector<std::string> required_params(const Layer& l, ModelKind kind) {
  static const std::vector<std::string> kAct{"bn_gamma", "bn_beta", "tau", "b0",
                                             "b1",       "prelu_slope", "kappa"};
  static const std::vector<std::string> kThreshold{"theta", "theta_int", "direction"};
  const bool training = kind == ModelKind::Training;
  std::vector<std::string> p;
  switch (l.op) {
    case OpKind::Input:
      if (training && l.out_bits == 1) p = {"kappa"};
      break;
    case OpKind::Conv:
      if (l.in_bits == 1) {
        if (training) {
          p = {"weight", "alpha", "lambda"};
          if (l.out_bits == 1)
            p.insert(p.end(), kAct.begin(), kAct.end());
          else if (l.out_bits == 4)
            p.insert(p.end(), {"bn_gamma", "bn_beta", "int4_step"});
        } else {
          p = {"weight"};
          if (l.out_bits == 1)
            p.insert(p.end(), kThreshold.begin(), kThreshold.end());
          else if (l.out_bits == 4)
            p.insert(p.end(), {"requant_scale", "requant_offset"});
          else
            p.push_back("out_scale");
        }
      } else {
        p = {"weight", "bias"};
      }
      break;
    case OpKind::Sign:
    case OpKind::Requant:
      p = training ? kAct : kThreshold;
      break;
    case OpKind::BatchNorm:
      p = {"gamma", "beta"};
      break;
    case OpKind::Scale:
      p = {"scale"};
      break;
    case OpKind::PReLU:
      p = {"slope"};
      break;
    case OpKind::EltwiseAdd:
    case OpKind::ReLU:
    case OpKind::MaxPool:
    case OpKind::AvgPool:
      break;
  }
  for (auto& name : p) name = l.name + "." + name;
  return p;
}

namespace {

void check_supported(const Layer& l) {
  const auto bad = [&](const std::string& why) {
    throw GraphError("layer '" + l.name + "' is not executable: " + why);
  };
  switch (l.op) {
    case OpKind::Conv:
      if (l.in_bits != 1 && l.in_bits < 8) bad("conv input must be 1-bit or >= 8-bit");
      if (l.in_bits == 1 && l.out_bits != 1 && l.out_bits != 4 && l.out_bits < 8)
        bad("binary conv output must be 1-bit, 4-bit or >= 8-bit");
      if (l.in_bits >= 8 && l.out_bits < 8) bad("real conv output must be >= 8-bit");
      break;
    case OpKind::Sign:
    case OpKind::Requant:
      if (l.out_bits != 1) bad("only conversions to 1-bit are executable");
      if (l.in_bits != 4 && l.in_bits < 8) bad("conversion input must be 4-bit or >= 8-bit");
      break;
    case OpKind::EltwiseAdd:
      if (l.in_bits != l.out_bits || (l.in_bits != 4 && l.in_bits < 8))
        bad("add must be 4-bit saturating or >= 8-bit real");
      break;
    case OpKind::Input:
      break;
    case OpKind::MaxPool:
    case OpKind::AvgPool:
      if (l.out_bits < 8) bad("pooling output must be >= 8-bit");
      break;
    default:
      if (l.in_bits < 8 || l.out_bits < 8) bad("real-valued op needs >= 8-bit data");
  }
}

void check_size(const Model& m, const std::string& name, std::int64_t expected) {
  const Blob& b = m.at(name);
  if (b.elements() != expected)
    throw ShapeError("parameter '" + name + "' has " + std::to_string(b.elements()) +
                     " elements, expected " + std::to_string(expected));
}

}  // namespace

void Model::validate() const {
  graph.validate();
  std::set<std::string> used;
  for (const auto& l : graph.layers) {
    check_supported(l);
    for (const auto& name : required_params(l, kind)) {
      const Blob& b = at(name);
      used.insert(name);
      const std::string param = name.substr(l.name.size() + 1);
      const std::int64_t kk = std::int64_t{l.K} * l.K;
      if (param == "weight") {
        check_size(*this, name, std::int64_t{l.N} * l.C * kk);
        if (b.dtype == DType::Bits &&
            b.dims != std::vector<std::int64_t>{l.N, l.K, l.K, l.C})
          throw ShapeError("parameter '" + name + "' must be packed N x K x K x C");
      } else if (param == "alpha") {
        const std::int64_t n = b.elements();
        if (n != l.N && n != std::int64_t{l.N} * l.C && n != std::int64_t{l.N} * l.C * kk)
          throw ShapeError("parameter '" + name + "' must have N, N*C or N*C*K*K elements");
      } else if (param == "kappa") {
        check_size(*this, name, 1);
      } else if (param == "direction") {
        if (b.dtype != DType::Bits) throw InvalidParam("'" + name + "' must be a bit mask");
        check_size(*this, name, l.N);
      } else {
        check_size(*this, name, l.N);
      }
    }
  }
  for (const auto& [name, blob] : tensors)
    if (!used.count(name)) throw GraphError("parameter '" + name + "' belongs to no layer");
}

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Header (64 bytes): magic, version, kind, reserved, then offset/size of the
// graph and tensor sections and an FNV-1a checksum of each.
std::vector<std::uint8_t> serialize_model(const Model& m) {
  const std::string graph = to_json(m.graph, -1);
  Writer tensors;
  tensors.u32(static_cast<std::uint32_t>(m.tensors.size()));
  for (const auto& [name, b] : m.tensors) {
    tensors.str(name);
    tensors.u32(static_cast<std::uint32_t>(b.dtype));
    tensors.u32(static_cast<std::uint32_t>(b.dims.size()));
    for (auto d : b.dims) tensors.i64(d);
    tensors.u64(b.data.size());
    tensors.bytes(b.data.data(), b.data.size());
  }
  const auto* g = reinterpret_cast<const std::uint8_t*>(graph.data());
  Writer w;
  w.bytes(reinterpret_cast<const std::uint8_t*>(kMagic), 4);
  w.u32(kContainerVersion);
  w.u32(static_cast<std::uint32_t>(m.kind));
  w.u32(0);
  w.u64(kHeaderSize);
  w.u64(graph.size());
  w.u64(kHeaderSize + graph.size());
  w.u64(tensors.out.size());
  w.u64(fnv1a64(g, graph.size()));
  w.u64(fnv1a64(tensors.out.data(), tensors.out.size()));
  w.bytes(g, graph.size());
  w.bytes(tensors.out.data(), tensors.out.size());
  return std::move(w.out);
}

Model parse_model(const std::vector<std::uint8_t>& bytes) {
  Reader h(bytes.data(), bytes.size(), "container header");
  if (std::memcmp(h.take(4), kMagic, 4) != 0) throw ParseError("not a BNLM container");
  const std::uint32_t version = h.u32();
  if (version != kContainerVersion)
    throw ParseError("unsupported container version " + std::to_string(version));
  const std::uint32_t kind = h.u32();
  if (kind != 1 && kind != 2) throw ParseError("unknown container kind " + std::to_string(kind));
  h.u32();
  const std::uint64_t g_off = h.u64(), g_size = h.u64(), t_off = h.u64(), t_size = h.u64();
  const std::uint64_t g_sum = h.u64(), t_sum = h.u64();
  const auto in_range = [&](std::uint64_t off, std::uint64_t size) {
    return off >= kHeaderSize && off <= bytes.size() && size <= bytes.size() - off;
  };
  if (!in_range(g_off, g_size) || !in_range(t_off, t_size))
    throw ParseError("container section offsets out of range");
  if (fnv1a64(bytes.data() + g_off, g_size) != g_sum)
    throw ParseError("graph section checksum mismatch");
  if (fnv1a64(bytes.data() + t_off, t_size) != t_sum)
    throw ParseError("tensor section checksum mismatch");

  Model m;
  m.kind = static_cast<ModelKind>(kind);
  m.graph = graph_from_json(
      std::string(reinterpret_cast<const char*>(bytes.data() + g_off), g_size));
  Reader t(bytes.data() + t_off, t_size, "tensor section");
  const std::uint32_t count = t.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = t.str();
    Blob b;
    const std::uint32_t dtype = t.u32();
    if (dtype < 1 || dtype > 6)
      throw ParseError("tensor '" + name + "': unknown dtype " + std::to_string(dtype));
    b.dtype = static_cast<DType>(dtype);
    const std::uint32_t rank = t.u32();
    if (rank > 8) throw ParseError("tensor '" + name + "': rank too large");
    for (std::uint32_t r = 0; r < rank; ++r) {
      b.dims.push_back(t.i64());
      if (b.dims.back() < 0) throw ParseError("tensor '" + name + "': negative extent");
    }
    const std::uint64_t size = t.u64();
    if (static_cast<std::int64_t>(size) != payload_bytes(b.dtype, b.dims))
      throw ParseError("tensor '" + name + "': payload size does not match dims");
    const auto* p = t.take(size);
    b.data.assign(p, p + size);
    if (!m.tensors.emplace(name, std::move(b)).second)
      throw ParseError("duplicate tensor '" + name + "'");
  }
  if (!t.done()) throw ParseError("trailing bytes in tensor section");
  return m;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

void save_model(const Model& m, const std::string& path) {
  write_file(path, serialize_model(m));
}

Model load_model(const std::string& path) { return parse_model(read_file(path)); }

}  // namespace bnn
