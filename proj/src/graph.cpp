// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnn/graph.hpp"

#include <array>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace bnn {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<OpKind, const char*>, 11> kOpNames{{
    {OpKind::Input, "input"},
    {OpKind::Conv, "conv"},
    {OpKind::EltwiseAdd, "eltwise_add"},
    {OpKind::Requant, "requant"},
    {OpKind::Sign, "sign"},
    {OpKind::BatchNorm, "batchnorm"},
    {OpKind::Scale, "scale"},
    {OpKind::PReLU, "prelu"},
    {OpKind::ReLU, "relu"},
    {OpKind::MaxPool, "maxpool"},
    {OpKind::AvgPool, "avgpool"},
}};

bool windowed(OpKind op) {
  return op == OpKind::Conv || op == OpKind::MaxPool || op == OpKind::AvgPool;
}

std::string where(const Layer& l) { return "layer '" + l.name + "'"; }

}  // namespace

const char* to_string(OpKind op) {
  for (const auto& [k, n] : kOpNames)
    if (k == op) return n;
  return "?";
}

std::optional<OpKind> op_from_string(const std::string& s) {
  for (const auto& [k, n] : kOpNames)
    if (s == n) return k;
  return std::nullopt;
}

const char* to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::ResBlock:
      return "resblock";
    case BlockKind::BiReal:
      return "bireal";
    case BlockKind::BiNeal:
      break;
  }
  return "bineal";
}

std::optional<BlockKind> block_kind_from_string(const std::string& s) {
  if (s == "resblock") return BlockKind::ResBlock;
  if (s == "bireal") return BlockKind::BiReal;
  if (s == "bineal") return BlockKind::BiNeal;
  return std::nullopt;
}

const Layer* GraphSpec::find(const std::string& layer) const {
  for (const auto& l : layers)
    if (l.name == layer) return &l;
  return nullptr;
}

std::vector<int> GraphSpec::topological_order() const {
  std::map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(layers.size()); ++i) {
    if (layers[i].name.empty()) throw GraphError("layer " + std::to_string(i) + " has no name");
    if (!index.emplace(layers[i].name, i).second)
      throw GraphError("duplicate layer name '" + layers[i].name + "'");
  }
  std::vector<int> pending(layers.size(), 0);
  std::vector<std::vector<int>> consumers(layers.size());
  for (int i = 0; i < static_cast<int>(layers.size()); ++i)
    for (const auto& in : layers[i].inputs) {
      const auto it = index.find(in);
      if (it == index.end())
        throw GraphError(where(layers[i]) + " reads unknown layer '" + in + "'");
      consumers[it->second].push_back(i);
      ++pending[i];
    }
  // Smallest ready index first keeps declaration order where possible.
  std::vector<int> order;
  std::set<int> ready;
  for (int i = 0; i < static_cast<int>(layers.size()); ++i)
    if (pending[i] == 0) ready.insert(i);
  while (!ready.empty()) {
    const int i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (int c : consumers[i])
      if (--pending[c] == 0) ready.insert(c);
  }
  if (order.size() != layers.size()) throw GraphError("graph contains a cycle");
  return order;
}

const Layer& GraphSpec::output() const {
  if (layers.empty()) throw GraphError("empty graph has no output layer");
  std::set<std::string> consumed;
  for (const auto& l : layers) consumed.insert(l.inputs.begin(), l.inputs.end());
  const Layer* out = nullptr;
  for (const auto& l : layers)
    if (!consumed.count(l.name)) {
      if (out) throw GraphError("graph has more than one output ('" + out->name +
                                "', '" + l.name + "')");
      out = &l;
    }
  if (!out) throw GraphError("graph has no output layer");
  return *out;
}

void GraphSpec::validate() const {
  const std::vector<int> order = topological_order();
  static const std::set<int> kBits{1, 4, 8, 16, 32};
  for (int i : order) {
    const Layer& l = layers[i];
    if (!kBits.count(l.in_bits) || !kBits.count(l.out_bits))
      throw GraphError(where(l) + ": bit-depth must be one of 1, 4, 8, 16, 32");
    if (l.N <= 0 || l.C <= 0 || l.H_out <= 0 || l.W_out <= 0 || l.B <= 0)
      throw GraphError(where(l) + ": extents must be positive");
    const std::size_t arity = l.op == OpKind::Input        ? 0
                              : l.op == OpKind::EltwiseAdd ? 2
                                                           : 1;
    if (l.inputs.size() != arity)
      throw GraphError(where(l) + ": " + to_string(l.op) + " takes " +
                       std::to_string(arity) + " input(s), has " +
                       std::to_string(l.inputs.size()));
    if (l.op == OpKind::Input) {
      if (l.in_bits != l.out_bits || l.N != l.C)
        throw GraphError(where(l) + ": input layer must not change depth or channels");
      continue;
    }
    for (const auto& in : l.inputs) {
      const Layer& p = *find(in);
      if (p.out_bits != l.in_bits)
        throw GraphError(where(l) + ": expects " + std::to_string(l.in_bits) +
                         "-bit input but '" + p.name + "' produces " +
                         std::to_string(p.out_bits) + "-bit");
      if (p.N != l.C)
        throw GraphError(where(l) + ": expects " + std::to_string(l.C) +
                         " channels but '" + p.name + "' produces " +
                         std::to_string(p.N));
      if (p.H_out != l.H_in || p.W_out != l.W_in || p.B != l.B)
        throw GraphError(where(l) + ": input extent does not match '" + p.name + "'");
    }
    if (windowed(l.op)) {
      if (l.K < 1 || l.stride < 1 || l.padding < 0)
        throw GraphError(where(l) + ": invalid kernel/stride/padding");
      const ConvGeometry g = l.geometry();
      if (g.out_extent(l.H_in) != l.H_out || g.out_extent(l.W_in) != l.W_out)
        throw GraphError(where(l) + ": output extent does not follow from kernel/stride/padding");
      if (l.op != OpKind::Conv && l.N != l.C)
        throw GraphError(where(l) + ": pooling must preserve channels");
    } else if (l.H_in != l.H_out || l.W_in != l.W_out || l.N != l.C) {
      throw GraphError(where(l) + ": elementwise op must preserve shape");
    }
  }
}

namespace {

Layer make_layer(std::string name, OpKind op, std::vector<std::string> inputs,
                 const Layer& src, int n, int k, int stride, int padding,
                 int in_bits, int out_bits) {
  Layer l;
  l.name = std::move(name);
  l.op = op;
  l.inputs = std::move(inputs);
  l.C = src.N;
  l.N = n;
  l.H_in = src.H_out;
  l.W_in = src.W_out;
  l.K = k;
  l.stride = stride;
  l.padding = padding;
  const ConvGeometry g{k, stride, padding};
  l.H_out = g.out_extent(l.H_in);
  l.W_out = g.out_extent(l.W_in);
  l.in_bits = in_bits;
  l.out_bits = out_bits;
  l.B = src.B;
  return l;
}

// Elementwise op over `src`.
Layer pointwise(std::string name, OpKind op, const Layer& src, int in_bits,
                int out_bits) {
  return make_layer(std::move(name), op, {src.name}, src, src.N, 1, 1, 0,
                    in_bits, out_bits);
}

const Layer& push(GraphSpec& g, Layer l) {
  g.layers.push_back(std::move(l));
  return g.layers.back();
}

}  // namespace

std::string append_block(GraphSpec& g, const BlockSpec& spec,
                         const std::string& input, const std::string& prefix) {
  const Layer* src_ptr = g.find(input);
  if (!src_ptr) throw GraphError("append_block: unknown input '" + input + "'");
  const Layer src = *src_ptr;
  const int cin = spec.in_channels(), cout = spec.out_channels();
  if (cin != src.N)
    throw GraphError("append_block: block expects " + std::to_string(cin) +
                     " input channels, '" + input + "' has " + std::to_string(src.N));
  if (spec.stride != 1 && spec.stride != 2)
    throw InvalidParam("block stride must be 1 or 2");
  const int s = spec.stride;
  const std::string p = prefix.empty() ? "" : prefix + ".";

  switch (spec.kind) {
    case BlockKind::BiNeal: {
      if (spec.skip_kernel < 1 || spec.skip_kernel % 2 == 0)
        throw InvalidParam("skip kernel must be odd");
      const Layer conv1 = push(g, make_layer(p + "conv1", OpKind::Conv, {input}, src,
                                             cout, 3, s, 1, 1, 1));
      const Layer conv2 = push(g, make_layer(p + "conv2", OpKind::Conv, {conv1.name},
                                             conv1, cout, 3, 1, 1, 1, 4));
      const Layer skip =
          push(g, make_layer(p + "skip", OpKind::Conv, {input}, src, cout,
                             spec.skip_kernel, s, spec.skip_kernel / 2, 1, 4));
      Layer add = pointwise(p + "add", OpKind::EltwiseAdd, conv2, 4, 4);
      add.inputs = {conv2.name, skip.name};
      const Layer a = push(g, add);
      return push(g, pointwise(p + "out", OpKind::Sign, a, 4, 1)).name;
    }
    case BlockKind::ResBlock: {
      const Layer conv1 = push(g, make_layer(p + "conv1", OpKind::Conv, {input}, src,
                                             cout, 3, s, 1, 8, 8));
      const Layer bn1 = push(g, pointwise(p + "bn1", OpKind::BatchNorm, conv1, 8, 8));
      const Layer relu1 = push(g, pointwise(p + "relu1", OpKind::ReLU, bn1, 8, 8));
      const Layer conv2 = push(g, make_layer(p + "conv2", OpKind::Conv, {relu1.name},
                                             relu1, cout, 3, 1, 1, 8, 8));
      const Layer bn2 = push(g, pointwise(p + "bn2", OpKind::BatchNorm, conv2, 8, 8));
      std::string shortcut = input;
      if (spec.downsample()) {
        const Layer down = push(g, make_layer(p + "down", OpKind::Conv, {input}, src,
                                              cout, 1, s, 0, 8, 8));
        shortcut = push(g, pointwise(p + "downbn", OpKind::BatchNorm, down, 8, 8)).name;
      }
      Layer add = pointwise(p + "add", OpKind::EltwiseAdd, bn2, 8, 8);
      add.inputs = {bn2.name, shortcut};
      const Layer a = push(g, add);
      return push(g, pointwise(p + "relu", OpKind::ReLU, a, 8, 8)).name;
    }
    case BlockKind::BiReal:
      break;
  }
  // Bi-Real: each conv re-binarizes its real input and adds a real shortcut.
  const Layer sign1 = push(g, pointwise(p + "sign1", OpKind::Requant, src, 8, 1));
  const Layer conv1 = push(g, make_layer(p + "conv1", OpKind::Conv, {sign1.name},
                                         sign1, cout, 3, s, 1, 1, 8));
  const Layer bn1 = push(g, pointwise(p + "bn1", OpKind::BatchNorm, conv1, 8, 8));
  std::string shortcut = input;
  if (spec.downsample()) {
    const Layer pool = push(g, make_layer(p + "pool", OpKind::AvgPool, {input}, src,
                                          src.N, s, s, 0, 8, 8));
    const Layer down = push(g, make_layer(p + "down", OpKind::Conv, {pool.name}, pool,
                                          cout, 1, 1, 0, 8, 8));
    shortcut = push(g, pointwise(p + "downbn", OpKind::BatchNorm, down, 8, 8)).name;
  }
  Layer add1 = pointwise(p + "add1", OpKind::EltwiseAdd, bn1, 8, 8);
  add1.inputs = {bn1.name, shortcut};
  const Layer a1 = push(g, add1);
  const Layer sign2 = push(g, pointwise(p + "sign2", OpKind::Requant, a1, 8, 1));
  const Layer conv2 = push(g, make_layer(p + "conv2", OpKind::Conv, {sign2.name},
                                         sign2, cout, 3, 1, 1, 1, 8));
  const Layer bn2 = push(g, pointwise(p + "bn2", OpKind::BatchNorm, conv2, 8, 8));
  Layer add2 = pointwise(p + "add2", OpKind::EltwiseAdd, bn2, 8, 8);
  add2.inputs = {bn2.name, a1.name};
  return push(g, add2).name;
}

namespace {

Layer input_layer(int channels, int height, int width, int bits) {
  Layer l;
  l.name = "input";
  l.op = OpKind::Input;
  l.N = l.C = channels;
  l.H_in = l.H_out = height;
  l.W_in = l.W_out = width;
  l.in_bits = l.out_bits = bits;
  return l;
}

int body_bits(BlockKind kind) { return kind == BlockKind::BiNeal ? 1 : 8; }

}  // namespace

GraphSpec build_block(const BlockSpec& spec, int height, int width) {
  GraphSpec g;
  g.name = std::string(to_string(spec.kind)) + (spec.downsample() ? "-downsample" : "");
  g.multiplier = spec.kind == BlockKind::BiNeal ? spec.multiplier : 1.0;
  g.layers.push_back(input_layer(spec.in_channels(), height, width, body_bits(spec.kind)));
  append_block(g, spec, "input", "block");
  return g;
}

GraphSpec build_resnet18(BlockKind kind, double multiplier, const ResNetOptions& opts) {
  if (!(multiplier > 0)) throw InvalidParam("multiplier must be positive");
  GraphSpec g;
  g.name = std::string("resnet18-") + to_string(kind);
  g.multiplier = kind == BlockKind::BiNeal ? multiplier : 1.0;
  std::string cur;
  if (opts.include_stem) {
    Layer in = input_layer(opts.input_channels, opts.input_size, opts.input_size, 8);
    in.boundary = true;
    g.layers.push_back(in);
    Layer conv = make_layer("stem.conv", OpKind::Conv, {"input"}, in, 64, 7, 2, 3, 8, 8);
    conv.boundary = true;
    const Layer c = push(g, conv);
    Layer bn = pointwise("stem.bn", OpKind::BatchNorm, c, 8, 8);
    bn.boundary = true;
    const Layer b = push(g, bn);
    Layer relu = pointwise("stem.relu", OpKind::ReLU, b, 8, 8);
    relu.boundary = true;
    const Layer r = push(g, relu);
    Layer pool = make_layer("stem.pool", OpKind::MaxPool, {r.name}, r, 64, 3, 2, 1, 8, 8);
    pool.boundary = true;
    cur = push(g, pool).name;
  } else {
    const int size = (opts.input_size + 3) / 4;
    Layer in = input_layer(64, size, size, 8);
    in.boundary = true;
    g.layers.push_back(in);
    cur = "input";
  }
  if (kind == BlockKind::BiNeal) {
    Layer sign = pointwise("stem.sign", OpKind::Requant, *g.find(cur), 8, 1);
    sign.boundary = true;
    cur = push(g, sign).name;
  }

  constexpr std::array<int, 4> kWidths{64, 128, 256, 512};
  int base_in = 64;
  for (int stage = 0; stage < 4; ++stage)
    for (int blk = 0; blk < 2; ++blk) {
      BlockSpec spec;
      spec.kind = kind;
      spec.cin = base_in;
      spec.cout = kWidths[stage];
      spec.stride = stage > 0 && blk == 0 ? 2 : 1;
      spec.multiplier = multiplier;
      spec.scale_input = !(stage == 0 && blk == 0);
      cur = append_block(g, spec, cur,
                         "s" + std::to_string(stage + 1) + "b" + std::to_string(blk + 1));
      base_in = kWidths[stage];
    }

  if (opts.include_head) {
    const Layer last = *g.find(cur);
    Layer pool = make_layer("head.pool", OpKind::AvgPool, {cur}, last, last.N,
                            last.H_out, last.H_out, 0, last.out_bits, 8);
    pool.boundary = true;
    const Layer p = push(g, pool);
    Layer fc = make_layer("head.fc", OpKind::Conv, {p.name}, p, opts.classes, 1, 1, 0, 8, 8);
    fc.boundary = true;
    push(g, fc);
  }
  return g;
}

std::string to_json(const GraphSpec& g, int indent) {
  json layers = json::array();
  for (const auto& l : g.layers) {
    json j = {{"name", l.name},   {"op", to_string(l.op)},   {"inputs", l.inputs},
              {"N", l.N},         {"C", l.C},                {"H_in", l.H_in},
              {"W_in", l.W_in},   {"H_out", l.H_out},        {"W_out", l.W_out},
              {"K", l.K},         {"stride", l.stride},      {"padding", l.padding},
              {"in_bits", l.in_bits}, {"out_bits", l.out_bits}, {"B", l.B}};
    if (l.boundary) j["boundary"] = true;
    layers.push_back(std::move(j));
  }
  const json doc = {{"schema", "bnn.graph"},
                    {"version", GraphSpec::kSchemaVersion},
                    {"name", g.name},
                    {"multiplier", g.multiplier},
                    {"layers", std::move(layers)}};
  return doc.dump(indent);
}

namespace {

int int_field(const json& j, const std::string& key, const std::string& loc,
              std::optional<int> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ParseError(loc + "." + key + ": missing required field");
  }
  const json& v = j.at(key);
  if (!v.is_number_integer())
    throw ParseError(loc + "." + key + ": expected an integer");
  return v.get<int>();
}

}  // namespace

GraphSpec graph_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("graph JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("graph JSON: top level must be an object");
  if (doc.value("schema", std::string()) != "bnn.graph")
    throw ParseError("schema: expected \"bnn.graph\"");
  if (!doc.contains("version") || !doc["version"].is_number_integer())
    throw ParseError("version: missing required field");
  if (doc["version"].get<int>() != GraphSpec::kSchemaVersion)
    throw ParseError("version: unsupported schema version " +
                     std::to_string(doc["version"].get<int>()));
  if (!doc.contains("layers") || !doc["layers"].is_array())
    throw ParseError("layers: missing required array");

  GraphSpec g;
  g.name = doc.value("name", std::string());
  if (doc.contains("multiplier")) {
    if (!doc["multiplier"].is_number()) throw ParseError("multiplier: expected a number");
    g.multiplier = doc["multiplier"].get<double>();
  }
  const json& layers = doc["layers"];
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string loc = "layers[" + std::to_string(i) + "]";
    const json& j = layers[i];
    if (!j.is_object()) throw ParseError(loc + ": expected an object");
    Layer l;
    if (!j.contains("name") || !j["name"].is_string())
      throw ParseError(loc + ".name: missing required field");
    l.name = j["name"].get<std::string>();
    if (!j.contains("op") || !j["op"].is_string())
      throw ParseError(loc + ".op: missing required field");
    const auto op = op_from_string(j["op"].get<std::string>());
    if (!op) throw ParseError(loc + ".op: unknown op kind '" + j["op"].get<std::string>() + "'");
    l.op = *op;
    if (j.contains("inputs")) {
      if (!j["inputs"].is_array()) throw ParseError(loc + ".inputs: expected an array");
      for (const auto& in : j["inputs"]) {
        if (!in.is_string()) throw ParseError(loc + ".inputs: expected layer names");
        l.inputs.push_back(in.get<std::string>());
      }
    }
    l.in_bits = int_field(j, "in_bits", loc);
    l.out_bits = int_field(j, "out_bits", loc);
    l.N = int_field(j, "N", loc);
    l.C = int_field(j, "C", loc);
    l.H_out = int_field(j, "H_out", loc);
    l.W_out = int_field(j, "W_out", loc);
    l.H_in = int_field(j, "H_in", loc, l.H_out);
    l.W_in = int_field(j, "W_in", loc, l.W_out);
    l.K = int_field(j, "K", loc, 1);
    l.stride = int_field(j, "stride", loc, 1);
    l.padding = int_field(j, "padding", loc, 0);
    l.B = int_field(j, "B", loc, 1);
    if (j.contains("boundary")) {
      if (!j["boundary"].is_boolean()) throw ParseError(loc + ".boundary: expected a boolean");
      l.boundary = j["boundary"].get<bool>();
    }
    g.layers.push_back(std::move(l));
  }
  return g;
}

GraphSpec load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return graph_from_json(ss.str());
}

void save_graph(const GraphSpec& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write graph file '" + path + "'");
  out << to_json(g) << "\n";
}

}  // namespace bnn
