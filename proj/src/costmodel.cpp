// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnn/costmodel.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace bnn {

using nlohmann::json;

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

void require_positive(std::initializer_list<std::int64_t> dims, const char* what) {
  for (auto d : dims)
    if (d <= 0) throw InvalidParam(std::string(what) + ": dimensions must be positive");
}

}  // namespace

SystolicConfig SystolicConfig::binary() { return {}; }

SystolicConfig SystolicConfig::eight_bit() {
  SystolicConfig c;
  c.name = "eight_bit";
  c.S = 16;
  c.psum_bits = 32;
  c.pe_bits = 8;
  return c;
}

void SystolicConfig::validate() const {
  if (S <= 0 || P <= 0 || M <= 0 || psum_bits <= 0 || pe_bits <= 0)
    throw InvalidParam("systolic config '" + name + "': S, P, M and widths must be positive");
}

const char* to_string(BoundaryPlacement p) {
  switch (p) {
    case BoundaryPlacement::BinaryArrayBitLines:
      return "binary-bitlines";
    case BoundaryPlacement::EightBitArray:
      return "eight-bit";
    case BoundaryPlacement::Excluded:
      break;
  }
  return "excluded";
}

BoundaryPlacement boundary_placement_from_string(const std::string& s) {
  if (s == "binary-bitlines") return BoundaryPlacement::BinaryArrayBitLines;
  if (s == "eight-bit") return BoundaryPlacement::EightBitArray;
  if (s == "excluded") return BoundaryPlacement::Excluded;
  throw InvalidParam("unknown boundary placement '" + s + "'");
}

Cycles t_star(const SystolicConfig& cfg, std::int64_t N, std::int64_t W, std::int64_t H) {
  require_positive({N, W, H}, "t_star");
  return ceil_div(N, cfg.S) * ceil_div(W * H, cfg.P) * cfg.S;
}

Cycles t_conv_1to1(const SystolicConfig& cfg, std::int64_t N, std::int64_t C,
                   std::int64_t K, std::int64_t W, std::int64_t H) {
  return t_conv_1tob(cfg, N, C, K, W, H, 1);
}

Cycles t_conv_1tob(const SystolicConfig& cfg, std::int64_t N, std::int64_t C,
                   std::int64_t K, std::int64_t W, std::int64_t H, std::int64_t b) {
  require_positive({N, C, K, W, H, b}, "t_conv");
  return W * H * K * (ceil_div(C * K, cfg.S) - 1 + b) * ceil_div(N, cfg.S) +
         t_star(cfg, N, W, H);
}

Cycles t_read(const SystolicConfig& cfg, std::int64_t B, std::int64_t W,
              std::int64_t H, std::int64_t C, int bits) {
  require_positive({B, W, H, C, bits}, "t_read");
  return ceil_div(B * W * H * ceil_div(C, cfg.S) * cfg.S * bits, cfg.M);
}

Cycles t_eltwise(const SystolicConfig& cfg, std::int64_t B, std::int64_t W,
                 std::int64_t H, std::int64_t C, int bits) {
  return 2 * t_read(cfg, B, W, H, C, bits);
}

Cycles t_requant(const SystolicConfig& cfg, std::int64_t B, std::int64_t W,
                 std::int64_t H, std::int64_t C, int bits) {
  return t_read(cfg, B, W, H, C, bits);
}

CycleEntry cost_layer(const Layer& l, const SystolicConfig& cfg, const CostOptions& opts) {
  CycleEntry e{l.name, to_string(l.op), "", cfg.name, 0};
  const auto read_input = [&](const char* formula) {
    e.formula = formula;
    e.cycles = t_read(cfg, l.B, l.W_in, l.H_in, l.C, l.in_bits);
  };
  switch (l.op) {
    case OpKind::Input:
      e.formula = "none";
      break;
    case OpKind::Conv: {
      const std::int64_t lines = ceil_div(l.in_bits, cfg.pe_bits);
      const std::int64_t b = ceil_div(l.out_bits, l.in_bits);
      e.formula = b == 1 ? "conv-1to1" : "conv-1tob";
      e.cycles = t_conv_1tob(cfg, l.N, l.C * lines, l.K, l.W_out, l.H_out, b);
      break;
    }
    case OpKind::EltwiseAdd:
      e.formula = "eltwise";
      e.cycles = t_eltwise(cfg, l.B, l.W_in, l.H_in, l.C, l.in_bits);
      break;
    case OpKind::Requant:
      read_input("requant");
      break;
    case OpKind::Sign:
      if (opts.pipeline_sign)
        e.formula = "pipelined";
      else
        read_input("read");
      break;
    case OpKind::BatchNorm:
    case OpKind::Scale:
    case OpKind::PReLU:
    case OpKind::ReLU:
      if (l.in_bits == l.out_bits)
        e.formula = "pipelined";
      else
        read_input("read");
      break;
    case OpKind::MaxPool:
    case OpKind::AvgPool:
      read_input("read");
      break;
  }
  return e;
}

namespace {

void add_entry(CycleReport& r, CycleEntry e) {
  if (e.formula == "pipelined") r.pipelined.push_back(e.layer);
  r.total += e.cycles;
  r.entries.push_back(std::move(e));
}

}  // namespace

CycleReport cycles_block(const GraphSpec& g, const SystolicConfig& cfg,
                         const CostOptions& opts) {
  g.validate();
  cfg.validate();
  CycleReport r;
  for (int i : g.topological_order()) add_entry(r, cost_layer(g.layers[i], cfg, opts));
  return r;
}

CycleReport cycles_network(const GraphSpec& g, const ArrayPair& arrays,
                           const CostOptions& opts) {
  g.validate();
  arrays.binary.validate();
  arrays.eight_bit.validate();
  bool all_multibit = true;
  for (const auto& l : g.layers)
    if (l.in_bits < 8 || l.out_bits < 8) all_multibit = false;

  CycleReport r;
  for (int i : g.topological_order()) {
    const Layer& l = g.layers[i];
    const SystolicConfig* cfg = &arrays.binary;
    if (all_multibit) {
      cfg = &arrays.eight_bit;
    } else if (l.boundary) {
      if (opts.boundary == BoundaryPlacement::Excluded) {
        add_entry(r, CycleEntry{l.name, to_string(l.op), "excluded", "excluded", 0});
        continue;
      }
      if (opts.boundary == BoundaryPlacement::EightBitArray) cfg = &arrays.eight_bit;
    } else if (l.op == OpKind::Conv && l.in_bits > 1) {
      cfg = &arrays.eight_bit;
    }
    add_entry(r, cost_layer(l, *cfg, opts));
  }
  return r;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

AreaReport area_report(const CellAreas& cells, const ArrayPair& arrays) {
  const double s8 = arrays.eight_bit.S, s1 = arrays.binary.S;
  AreaReport r;
  r.eight_bit.pe = std::llround((cells.multiplier + cells.adder) * s8 * s8);
  r.eight_bit.psum = std::llround(cells.psum_32b * s8);
  r.binary_pe_exact = cells.xnor * s1 * s1 + cells.popcount * s1;
  r.binary.pe = static_cast<std::int64_t>(std::ceil(r.binary_pe_exact - 1e-9));
  r.binary.psum = std::llround(cells.psum_16b * s1);
  for (ArrayArea* a : {&r.eight_bit, &r.binary}) a->total = a->pe + a->psum;
  r.pe_ratio = static_cast<double>(r.binary.pe) / r.eight_bit.pe;
  r.psum_ratio = static_cast<double>(r.binary.psum) / r.eight_bit.psum;
  r.total_ratio = static_cast<double>(r.binary.total) / r.eight_bit.total;
  return r;
}

EnergyBounds energy_bounds(const AreaReport& area) {
  EnergyBounds b{round2(area.pe_ratio), round2(area.total_ratio)};
  if (b.lower > b.upper) std::swap(b.lower, b.upper);
  return b;
}

std::string to_csv(const CycleReport& r) {
  std::ostringstream os;
  os << "layer,op,formula,array,cycles\n";
  for (const auto& e : r.entries)
    os << e.layer << ',' << e.op << ',' << e.formula << ',' << e.array << ','
       << e.cycles << '\n';
  os << "total,,,," << r.total << '\n';
  return os.str();
}

std::string to_json(const CycleReport& r, int indent) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"layer", e.layer},
                       {"op", e.op},
                       {"formula", e.formula},
                       {"array", e.array},
                       {"cycles", e.cycles}});
  return json{{"entries", entries}, {"pipelined", r.pipelined}, {"total", r.total}}
      .dump(indent);
}

std::string to_csv(const AreaReport& r) {
  std::ostringstream os;
  os << "array,pe_um2,psum_um2,total_um2\n";
  os << "eight_bit," << r.eight_bit.pe << ',' << r.eight_bit.psum << ','
     << r.eight_bit.total << '\n';
  os << "binary," << r.binary.pe << ',' << r.binary.psum << ',' << r.binary.total
     << '\n';
  os << std::fixed << std::setprecision(2) << "ratio," << round2(r.pe_ratio) << ','
     << round2(r.psum_ratio) << ',' << round2(r.total_ratio) << '\n';
  return os.str();
}

std::string to_json(const AreaReport& r, int indent) {
  const auto arr = [](const ArrayArea& a) {
    return json{{"pe", a.pe}, {"psum", a.psum}, {"total", a.total}};
  };
  const EnergyBounds e = energy_bounds(r);
  return json{{"eight_bit", arr(r.eight_bit)},
              {"binary", arr(r.binary)},
              {"binary_pe_exact", r.binary_pe_exact},
              {"ratios",
               {{"pe", round2(r.pe_ratio)},
                {"psum", round2(r.psum_ratio)},
                {"total", round2(r.total_ratio)}}},
              {"energy_bounds", {e.lower, e.upper}}}
      .dump(indent);
}

namespace {

SystolicConfig parse_config(const json& j, SystolicConfig c, const std::string& loc) {
  if (!j.is_object()) throw ParseError(loc + ": expected an object");
  for (const auto& [key, v] : j.items()) {
    int* field = key == "S"           ? &c.S
                 : key == "P"         ? &c.P
                 : key == "M"         ? &c.M
                 : key == "psum_bits" ? &c.psum_bits
                 : key == "pe_bits"   ? &c.pe_bits
                                      : nullptr;
    if (key == "name") {
      if (!v.is_string()) throw ParseError(loc + ".name: expected a string");
      c.name = v.get<std::string>();
      continue;
    }
    if (!field) throw ParseError(loc + "." + key + ": unknown field");
    if (!v.is_number_integer() || v.get<std::int64_t>() <= 0)
      throw ParseError(loc + "." + key + ": expected a positive integer");
    *field = v.get<int>();
  }
  return c;
}

json parse_text(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

SystolicConfig config_from_json(const std::string& text) {
  return parse_config(parse_text(text, "array JSON"), SystolicConfig::binary(), "array");
}

ArrayPair arrays_from_json(const std::string& text) {
  const json j = parse_text(text, "array JSON");
  if (!j.is_object()) throw ParseError("array JSON: top level must be an object");
  ArrayPair p;
  for (const auto& [key, v] : j.items()) {
    if (key == "binary")
      p.binary = parse_config(v, p.binary, "binary");
    else if (key == "eight_bit")
      p.eight_bit = parse_config(v, p.eight_bit, "eight_bit");
    else
      throw ParseError(key + ": unknown field (expected \"binary\" or \"eight_bit\")");
  }
  return p;
}

ArrayPair load_arrays(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open array file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return arrays_from_json(ss.str());
}

}  // namespace bnn
