// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnn/network.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <type_traits>

namespace bnn {

namespace {

using Eigen::ArrayXd;
using Eigen::ArrayXXd;

template <class... Fs>
struct Overload : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overload(Fs...) -> Overload<Fs...>;

// Channel-major view of an NHWC tensor: one column per pixel.
Eigen::Map<ArrayXXd> channel_view(RealTensor& t) {
  return {t.array().data(), t.shape().d3, t.size() / std::max(t.shape().d3, 1)};
}

RealTensor affine(RealTensor x, const ArrayXd& scale, const ArrayXd& shift) {
  if (scale.size() != x.shape().d3 || shift.size() != x.shape().d3)
    throw ShapeError("per-channel parameters do not match channel count");
  auto v = channel_view(x);
  v.colwise() *= scale;
  v.colwise() += shift;
  return x;
}

RealTensor pool(const RealTensor& x, ConvGeometry g, bool max) {
  const Shape4 s = x.shape();
  const int ho = g.out_extent(s.d1), wo = g.out_extent(s.d2);
  if (ho <= 0 || wo <= 0) throw ShapeError("pool: empty output");
  RealTensor out(Shape4{s.d0, ho, wo, s.d3});
  for (int b = 0; b < s.d0; ++b)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox)
        for (int c = 0; c < s.d3; ++c) {
          double acc = max ? -std::numeric_limits<double>::infinity() : 0.0;
          int taps = 0;
          for (int ky = 0; ky < g.kernel; ++ky)
            for (int kx = 0; kx < g.kernel; ++kx) {
              const int iy = oy * g.stride - g.padding + ky;
              const int ix = ox * g.stride - g.padding + kx;
              if (iy < 0 || iy >= s.d1 || ix < 0 || ix >= s.d2) continue;
              const double v = x(b, iy, ix, c);
              acc = max ? std::max(acc, v) : acc + v;
              ++taps;
            }
          out(b, oy, ox, c) = max ? acc : acc / taps;
        }
  return out;
}

RealTensor real_weight(const Model& m, const Layer& l) {
  return RealTensor(Shape4{l.N, l.C, l.K, l.K}, m.reals(l.name + ".weight"));
}

template <typename T>
const T& expect(const std::variant<PackedBitTensor, Int4Tensor, RealTensor>& v,
                const Layer& l, const char* what) {
  if (const T* p = std::get_if<T>(&v)) return *p;
  throw GraphError("layer '" + l.name + "' expects " + what + " input");
}

template <typename T>
const T& expect(const std::variant<SignTensor, Int4Tensor, RealTensor>& v, const Layer& l,
                const char* what) {
  if (const T* p = std::get_if<T>(&v)) return *p;
  throw GraphError("layer '" + l.name + "' expects " + what + " input");
}

// Code values as reals: ±1 for bits, the integer for INT4.
template <typename Bits>
RealTensor widen(const std::variant<Bits, Int4Tensor, RealTensor>& v) {
  if (const auto* r = std::get_if<RealTensor>(&v)) return *r;
  if (const auto* q = std::get_if<Int4Tensor>(&v)) {
    RealTensor out(q->shape());
    for (std::int64_t i = 0; i < q->size(); ++i) out.array()[i] = q->get(i);
    return out;
  }
  const auto& b = std::get<Bits>(v);
  if constexpr (std::is_same_v<Bits, SignTensor>)
    return b.template cast<double>();
  else
    return unpack(b).template cast<double>();
}

// Real-valued ops shared by both paths. Returns nullopt for other ops.
std::optional<RealTensor> real_op(const Model& m, const Layer& l,
                                  const std::vector<const RealTensor*>& in) {
  const std::string p = l.name + ".";
  switch (l.op) {
    case OpKind::Conv: {
      RealTensor y = ref_conv(real_weight(m, l), *in[0], l.geometry(), 0.0);
      return affine(std::move(y), ArrayXd::Ones(l.N), m.reals(p + "bias"));
    }
    case OpKind::BatchNorm:
      return affine(*in[0], m.reals(p + "gamma"), m.reals(p + "beta"));
    case OpKind::Scale:
      return affine(*in[0], m.reals(p + "scale"), ArrayXd::Zero(l.N));
    case OpKind::PReLU: {
      RealTensor y = *in[0];
      const ArrayXd slope = m.reals(p + "slope");
      auto v = channel_view(y);
      for (Eigen::Index j = 0; j < v.cols(); ++j)
        v.col(j) = (v.col(j) > 0.0).select(v.col(j), v.col(j) * slope);
      return y;
    }
    case OpKind::ReLU:
      return RealTensor(in[0]->shape(), in[0]->array().max(0.0));
    case OpKind::MaxPool:
    case OpKind::AvgPool:
      return pool(*in[0], l.geometry(), l.op == OpKind::MaxPool);
    case OpKind::EltwiseAdd:
      if (!(in[0]->shape() == in[1]->shape())) throw ShapeError("add: shapes differ");
      return RealTensor(in[0]->shape(), in[0]->array() + in[1]->array());
    default:
      return std::nullopt;
  }
}

const Layer* single_input(const GraphSpec& g) {
  const Layer* input = nullptr;
  for (const auto& l : g.layers)
    if (l.op == OpKind::Input) {
      if (input) throw GraphError("executable graphs have exactly one input layer");
      input = &l;
    }
  if (!input) throw GraphError("graph has no input layer");
  return input;
}

void check_input_shape(const Layer& in, Shape4 s, int bits) {
  if (s.d1 != in.H_out || s.d2 != in.W_out || s.d3 != in.N || s.d0 < 1)
    throw ShapeError("input tensor " + s.str() + " does not match graph input [B," +
                     std::to_string(in.H_out) + "," + std::to_string(in.W_out) + "," +
                     std::to_string(in.N) + "]");
  const int want = in.out_bits >= 8 ? 8 : in.out_bits;
  if (bits != want)
    throw ShapeError("input tensor is " + std::to_string(bits) + "-bit, graph expects " +
                     std::to_string(want) + "-bit");
}

Eigen::ArrayXd ones(int n) { return ArrayXd::Ones(n); }

}  // namespace

Shape4 shape_of(const Value& v) {
  return std::visit([](const auto& t) { return t.shape(); }, v);
}

Shape4 shape_of(const RefValue& v) {
  return std::visit([](const auto& t) { return t.shape(); }, v);
}

Value to_value(const RefValue& v) {
  return std::visit(Overload{[](const SignTensor& s) -> Value { return pack(s); },
                             [](const Int4Tensor& q) -> Value { return q; },
                             [](const RealTensor& r) -> Value { return r; }},
                    v);
}

int bits_of(const Value& v) {
  return std::visit(Overload{[](const PackedBitTensor&) { return 1; },
                             [](const Int4Tensor&) { return 4; },
                             [](const RealTensor&) { return 8; }},
                    v);
}

ActivationParams load_activation(const Model& m, const std::string& layer) {
  const std::string p = layer + ".";
  ActivationParams a;
  a.bn_gamma = m.reals(p + "bn_gamma");
  a.bn_beta = m.reals(p + "bn_beta");
  a.tau = m.reals(p + "tau");
  a.b0 = m.reals(p + "b0");
  a.b1 = m.reals(p + "b1");
  a.prelu_slope = m.reals(p + "prelu_slope");
  a.kappa = m.reals(p + "kappa")[0];
  return a;
}

void store_activation(Model& m, const std::string& layer, const ActivationParams& a) {
  const std::string p = layer + ".";
  m.tensors[p + "bn_gamma"] = Blob::f32(a.bn_gamma);
  m.tensors[p + "bn_beta"] = Blob::f32(a.bn_beta);
  m.tensors[p + "tau"] = Blob::f32(a.tau);
  m.tensors[p + "b0"] = Blob::f32(a.b0);
  m.tensors[p + "b1"] = Blob::f32(a.b1);
  m.tensors[p + "prelu_slope"] = Blob::f32(a.prelu_slope);
  m.tensors[p + "kappa"] = Blob::f32(ArrayXd::Constant(1, a.kappa));
}

OverParamConvUnit load_unit(const Model& m, const Layer& l) {
  const std::string p = l.name + ".";
  OverParamConvUnit u;
  u.weight = real_weight(m, l);
  const Blob& alpha = m.at(p + "alpha");
  u.alpha.values = alpha.reals();
  u.alpha.layout = alpha.dims.size() == 1   ? WeightSharpness::Layout::PerOutput
                   : alpha.dims.size() == 2 ? WeightSharpness::Layout::PerOutputInput
                                            : WeightSharpness::Layout::PerElement;
  u.lambda = m.reals(p + "lambda");
  u.geometry = l.geometry();
  if (l.out_bits == 1) {
    u.out_kind = OutKind::Bit1;
    u.act = load_activation(m, l.name);
  } else if (l.out_bits == 4) {
    u.out_kind = OutKind::Int4;
    u.act = ActivationParams::neutral(l.N);
    u.act.bn_gamma = m.reals(p + "bn_gamma");
    u.act.bn_beta = m.reals(p + "bn_beta");
    u.int4_step = m.reals(p + "int4_step");
  } else {
    // Real output: only the scaled accumulator is used.
    u.out_kind = OutKind::Bit1;
    u.act = ActivationParams::neutral(l.N);
  }
  return u;
}

void store_unit(Model& m, const Layer& l, const OverParamConvUnit& u) {
  const std::string p = l.name + ".";
  const Shape4 s = u.weight.shape();
  m.tensors[p + "weight"] = Blob::f32(u.weight.array(), {s.d0, s.d1, s.d2, s.d3});
  std::vector<std::int64_t> adims{s.d0};
  if (u.alpha.layout == WeightSharpness::Layout::PerOutputInput) adims = {s.d0, s.d1};
  if (u.alpha.layout == WeightSharpness::Layout::PerElement) adims = {s.d0, s.d1, s.d2, s.d3};
  m.tensors[p + "alpha"] = Blob::f32(u.alpha.values, adims);
  m.tensors[p + "lambda"] = Blob::f32(u.lambda);
  if (l.out_bits == 1) {
    store_activation(m, l.name, u.act);
  } else if (l.out_bits == 4) {
    m.tensors[p + "bn_gamma"] = Blob::f32(u.act.bn_gamma);
    m.tensors[p + "bn_beta"] = Blob::f32(u.act.bn_beta);
    m.tensors[p + "int4_step"] = Blob::f32(u.int4_step);
  }
}

ChannelThresholds load_thresholds(const Model& m, const std::string& layer) {
  const std::string p = layer + ".";
  ChannelThresholds t;
  const ArrayXd theta = m.reals(p + "theta");
  t.theta.assign(theta.data(), theta.data() + theta.size());
  t.theta_int = m.at(p + "theta_int").ints();
  const PackedBitTensor dir = m.at(p + "direction").packed();
  const int n = static_cast<int>(t.theta_int.size());
  if (static_cast<int>(t.theta.size()) != n || dir.channels() != n)
    throw ShapeError("threshold arrays of '" + layer + "' differ in length");
  for (int c = 0; c < n; ++c)
    t.direction.push_back(dir.bit(0, 0, 0, c) ? Direction::LE : Direction::GE);
  return t;
}

void store_thresholds(Model& m, const std::string& layer, const ChannelThresholds& t) {
  const std::string p = layer + ".";
  const int n = t.channels();
  m.tensors[p + "theta"] =
      Blob::f64(Eigen::Map<const ArrayXd>(t.theta.data(), static_cast<Eigen::Index>(n)));
  m.tensors[p + "theta_int"] = Blob::i32(t.theta_int);
  PackedBitTensor dir(Shape4{1, 1, 1, n});
  for (int c = 0; c < n; ++c) dir.set_bit(0, 0, 0, c, t.direction[c] == Direction::LE);
  Blob b = Blob::bits(dir);
  b.dims = {n};
  m.tensors[p + "direction"] = std::move(b);
}

FusedBinaryConvUnit load_fused_unit(const Model& m, const Layer& l) {
  const std::string p = l.name + ".";
  FusedBinaryConvUnit u;
  u.weights = m.at(p + "weight").packed();
  u.geometry = l.geometry();
  if (l.out_bits == 1) {
    u.out_kind = OutKind::Bit1;
    u.threshold = load_thresholds(m, l.name);
  } else if (l.out_bits == 4) {
    u.out_kind = OutKind::Int4;
    u.requant_scale = m.reals(p + "requant_scale");
    u.requant_offset = m.reals(p + "requant_offset");
  }
  return u;
}

RefValue ref_forward(const Model& m, const RefValue& x, Trace* trace) {
  if (m.kind != ModelKind::Training) throw InvalidParam("ref_forward needs a training model");
  if (m.graph.layers.empty()) return x;
  m.validate();
  const Layer& input = *single_input(m.graph);
  check_input_shape(input, shape_of(x), bits_of(to_value(x)));

  std::map<std::string, RefValue> values;
  std::map<std::string, double> kappa;
  for (int i : m.graph.topological_order()) {
    const Layer& l = m.graph.layers[i];
    const auto in = [&](int k) -> const RefValue& { return values.at(l.inputs[k]); };
    RefValue out;
    if (l.op == OpKind::Input) {
      out = x;
      if (l.out_bits == 1) kappa[l.name] = m.reals(l.name + ".kappa")[0];
    } else if (l.op == OpKind::Conv && l.in_bits == 1) {
      const OverParamConvUnit u = load_unit(m, l);
      const SignTensor& xs = expect<SignTensor>(in(0), l, "1-bit");
      const double k_in = kappa.at(l.inputs[0]);
      if (l.out_bits == 1) {
        out = ref_unit_bits(u, xs, k_in);
        kappa[l.name] = u.act.kappa;
      } else if (l.out_bits == 4) {
        out = ref_unit_int4(u, xs, k_in);
      } else {
        out = ref_unit_preactivation(u, xs, k_in);
      }
    } else if (l.op == OpKind::Sign || l.op == OpKind::Requant) {
      const ActivationParams act = load_activation(m, l.name);
      if (const auto* q = std::get_if<Int4Tensor>(&in(0)))
        out = ref_binarize_int4(*q, act);
      else
        out = ref_binarize_activation(expect<RealTensor>(in(0), l, "real"), act);
      kappa[l.name] = act.kappa;
    } else if (l.op == OpKind::EltwiseAdd && std::holds_alternative<Int4Tensor>(in(0))) {
      out = saturating_add(std::get<Int4Tensor>(in(0)),
                           expect<Int4Tensor>(in(1), l, "int4"));
    } else {
      std::vector<RealTensor> widened;
      for (std::size_t k = 0; k < l.inputs.size(); ++k)
        widened.push_back(widen(in(static_cast<int>(k))));
      std::vector<const RealTensor*> reals;
      for (const auto& w : widened) reals.push_back(&w);
      out = *real_op(m, l, reals);
    }
    if (trace) (*trace)[l.name] = to_value(out);
    values[l.name] = std::move(out);
  }
  return values.at(m.graph.output().name);
}

Model fuse_model(const Model& m, std::vector<AuditEntry>* audit) {
  if (m.kind != ModelKind::Training) throw InvalidParam("fuse_model needs a training model");
  m.validate();
  Model out;
  out.kind = ModelKind::Fused;
  out.graph = m.graph;
  std::map<std::string, double> kappa;
  const auto record = [&](const std::string& layer, const ChannelThresholds& t) {
    store_thresholds(out, layer, t);
    if (!audit) return;
    for (int c = 0; c < t.channels(); ++c)
      audit->push_back({layer, c, t.theta[c], t.theta_int[c], t.direction[c]});
  };
  for (int i : m.graph.topological_order()) {
    const Layer& l = m.graph.layers[i];
    const std::string p = l.name + ".";
    try {
      if (l.op == OpKind::Input) {
        if (l.out_bits == 1) kappa[l.name] = m.reals(p + "kappa")[0];
      } else if (l.op == OpKind::Conv && l.in_bits == 1) {
        const OverParamConvUnit u = load_unit(m, l);
        const double k_in = kappa.at(l.inputs[0]);
        if (l.out_bits == 1 || l.out_bits == 4) {
          const FusedBinaryConvUnit f = fuse_unit(u, k_in);
          out.tensors[p + "weight"] = Blob::bits(f.weights);
          if (l.out_bits == 1) {
            record(l.name, f.threshold);
            kappa[l.name] = u.act.kappa;
          } else {
            out.tensors[p + "requant_scale"] = Blob::f64(f.requant_scale);
            out.tensors[p + "requant_offset"] = Blob::f64(f.requant_offset);
          }
        } else {
          u.validate();
          out.tensors[p + "weight"] = Blob::bits(fuse_weights(u.weight, u.alpha));
          out.tensors[p + "out_scale"] = Blob::f64(k_in * u.lambda);
        }
      } else if (l.op == OpKind::Sign || l.op == OpKind::Requant) {
        const ActivationParams act = load_activation(m, l.name);
        record(l.name, fuse_activation(act, ones(act.channels())));
        kappa[l.name] = act.kappa;
      } else {
        for (const auto& name : required_params(l, ModelKind::Fused))
          out.tensors[name] = m.at(name);
      }
    } catch (const DegenerateChannel& e) {
      throw DegenerateChannel("layer '" + l.name + "': " + e.what());
    }
  }
  return out;
}

Value run_graph(const Model& m, const Value& x, const ExecOptions& opts, Trace* trace) {
  if (m.kind != ModelKind::Fused) throw InvalidParam("run_graph needs a fused model");
  if (m.graph.layers.empty()) return x;
  m.validate();
  const Layer& input = *single_input(m.graph);
  check_input_shape(input, shape_of(x), bits_of(x));

  std::map<std::string, Value> values;
  for (int i : m.graph.topological_order()) {
    const Layer& l = m.graph.layers[i];
    const auto in = [&](int k) -> const Value& { return values.at(l.inputs[k]); };
    Value out;
    if (l.op == OpKind::Input) {
      out = x;
    } else if (l.op == OpKind::Conv && l.in_bits == 1) {
      const FusedBinaryConvUnit u = load_fused_unit(m, l);
      const AccumTensor acc =
          binary_conv(expect<PackedBitTensor>(in(0), l, "1-bit"), u, opts);
      if (l.out_bits == 1) {
        out = threshold_sign(acc, u.threshold);
      } else if (l.out_bits == 4) {
        out = to_int4(acc, u.requant_scale, u.requant_offset);
      } else {
        RealTensor r = acc.cast<double>();
        out = affine(std::move(r), m.reals(l.name + ".out_scale"), ArrayXd::Zero(l.N));
      }
    } else if (l.op == OpKind::Sign || l.op == OpKind::Requant) {
      const ChannelThresholds t = load_thresholds(m, l.name);
      if (const auto* q = std::get_if<Int4Tensor>(&in(0)))
        out = threshold_sign(*q, t);
      else
        out = threshold_sign(expect<RealTensor>(in(0), l, "real"), t);
    } else if (l.op == OpKind::EltwiseAdd && std::holds_alternative<Int4Tensor>(in(0))) {
      out = eltwise_add_int4(std::get<Int4Tensor>(in(0)),
                             expect<Int4Tensor>(in(1), l, "int4"));
    } else {
      std::vector<RealTensor> widened;
      for (std::size_t k = 0; k < l.inputs.size(); ++k)
        widened.push_back(widen(in(static_cast<int>(k))));
      std::vector<const RealTensor*> reals;
      for (const auto& w : widened) reals.push_back(&w);
      out = *real_op(m, l, reals);
    }
    if (trace) (*trace)[l.name] = out;
    values[l.name] = std::move(out);
  }
  return values.at(m.graph.output().name);
}

std::string Mismatch::str() const {
  std::ostringstream os;
  os << (layer.empty() ? std::string("output") : "layer '" + layer + "'") << " at (b=" << b
     << ", y=" << y << ", x=" << x << ", c=" << c << "): expected " << expected
     << ", got " << actual;
  return os.str();
}

namespace {

double element(const Value& v, int b, int y, int x, int c) {
  return std::visit(
      Overload{[&](const PackedBitTensor& t) { return double(t.sign(b, y, x, c)); },
               [&](const Int4Tensor& t) { return double(t.at(b, y, x, c)); },
               [&](const RealTensor& t) { return t(b, y, x, c); }},
      v);
}

template <typename Fn>
void for_each_diff(const Value& e, const Value& a, double rtol, Fn&& fn) {
  if (e.index() != a.index() || !(shape_of(e) == shape_of(a)))
    throw ShapeError("compared values differ in kind or shape");
  const Shape4 s = shape_of(e);
  for (int b = 0; b < s.d0; ++b)
    for (int y = 0; y < s.d1; ++y)
      for (int x = 0; x < s.d2; ++x)
        for (int c = 0; c < s.d3; ++c) {
          const double ve = element(e, b, y, x, c), va = element(a, b, y, x, c);
          const double tol = std::holds_alternative<RealTensor>(e)
                                 ? rtol * std::max(1.0, std::abs(ve))
                                 : 0.0;
          if (std::abs(ve - va) > tol && !fn(b, y, x, c, ve, va)) return;
        }
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::optional<Mismatch> compare_values(const Value& e, const Value& a, double rtol) {
  std::optional<Mismatch> first;
  for_each_diff(e, a, rtol, [&](int b, int y, int x, int c, double ve, double va) {
    first = Mismatch{"", b, y, x, c, num(ve), num(va)};
    return false;
  });
  return first;
}

std::int64_t count_mismatches(const Value& e, const Value& a, double rtol) {
  std::int64_t n = 0;
  for_each_diff(e, a, rtol, [&](int, int, int, int, double, double) {
    ++n;
    return true;
  });
  return n;
}

std::vector<std::uint8_t> encode_tensor(const Value& v) {
  const Shape4 s = shape_of(v);
  std::vector<std::uint8_t> out;
  const auto u32 = [&](std::uint32_t w) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
  };
  const auto u64 = [&](std::uint64_t w) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
  };
  const DType dt = std::visit(Overload{[](const PackedBitTensor&) { return DType::Bits; },
                                       [](const Int4Tensor&) { return DType::Int4; },
                                       [](const RealTensor&) { return DType::F64; }},
                              v);
  for (std::uint32_t w : {kTensorMagic, static_cast<std::uint32_t>(dt),
                          static_cast<std::uint32_t>(s.d0), static_cast<std::uint32_t>(s.d1),
                          static_cast<std::uint32_t>(s.d2), static_cast<std::uint32_t>(s.d3),
                          static_cast<std::uint32_t>(word_size(dt)), 0u})
    u32(w);
  std::visit(Overload{[&](const PackedBitTensor& t) {
                        for (Word w : t.words()) u64(w);
                      },
                      [&](const Int4Tensor& t) {
                        out.insert(out.end(), t.bytes().begin(), t.bytes().end());
                      },
                      [&](const RealTensor& t) {
                        for (Eigen::Index i = 0; i < t.size(); ++i) {
                          std::uint64_t bits;
                          std::memcpy(&bits, &t.array()[i], 8);
                          u64(bits);
                        }
                      }},
             v);
  return out;
}

Value decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 32) throw ParseError("tensor blob: header truncated");
  const auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[off + i]} << (8 * i);
    return v;
  };
  const auto u64 = [&](std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes[off + i]} << (8 * i);
    return v;
  };
  if (u32(0) != kTensorMagic) throw ParseError("tensor blob: bad magic");
  const std::uint32_t dtype = u32(4);
  std::uint32_t dims[4];
  for (int i = 0; i < 4; ++i) {
    dims[i] = u32(8 + 4 * i);
    if (dims[i] > (1u << 24)) throw ParseError("tensor blob: extent too large");
  }
  const Shape4 s{static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                 static_cast<int>(dims[2]), static_cast<int>(dims[3])};
  const std::size_t payload = bytes.size() - 32;
  const auto need = [&](std::size_t n) {
    if (payload != n)
      throw ParseError("tensor blob: payload is " + std::to_string(payload) +
                       " bytes, expected " + std::to_string(n));
  };
  const std::size_t count = static_cast<std::size_t>(s.size());
  switch (static_cast<DType>(dtype)) {
    case DType::Bits: {
      const std::size_t words = count / std::max(s.d3, 1) * words_for(s.d3);
      need(8 * words);
      std::vector<Word> w(words);
      for (std::size_t i = 0; i < words; ++i) w[i] = u64(32 + 8 * i);
      return PackedBitTensor(s, std::move(w));
    }
    case DType::Int4:
      need((count + 1) / 2);
      return Int4Tensor::from_bytes(s, {bytes.begin() + 32, bytes.end()});
    case DType::F64: {
      need(8 * count);
      RealTensor t(s);
      for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t b = u64(32 + 8 * i);
        std::memcpy(&t.array()[static_cast<Eigen::Index>(i)], &b, 8);
      }
      return t;
    }
    case DType::F32: {
      need(4 * count);
      RealTensor t(s);
      for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t b = u32(32 + 4 * i);
        float f;
        std::memcpy(&f, &b, 4);
        t.array()[static_cast<Eigen::Index>(i)] = f;
      }
      return t;
    }
    default:
      throw ParseError("tensor blob: unsupported dtype " + std::to_string(dtype));
  }
}

}  // namespace bnn
