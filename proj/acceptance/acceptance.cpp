// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance harness. Prints one PASS/FAIL line per criterion followed by
// the evidence for it. Exits 0 once every criterion has been evaluated;
// with --strict it exits 1 if any criterion fails.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bnn/commands.hpp"
#include "bnn/costmodel.hpp"
#include "bnn/engine.hpp"
#include "bnn/network.hpp"
#include "bnn/repro.hpp"
#include "bnn/synth.hpp"
#include "oracles.hpp"

namespace {

using namespace bnn;
using Clock = std::chrono::steady_clock;

struct Verdict {
  int id;
  std::string title;
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int pick(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// 1 ------------------------------------------------------------------------

Verdict fusion_exactness(int units_per_case) {
  Rng rng(20260101);
  const auto t0 = Clock::now();
  std::int64_t units = 0, elements = 0, mismatches = 0;
  std::int64_t per_case[4] = {0, 0, 0, 0};
  std::int64_t ties = 0, int4_units = 0;
  std::string first;

  auto check = [&](const UnitDraw& d, double kappa_in) {
    const OverParamConvUnit u = random_unit(rng, d, kappa_in);
    const FusedBinaryConvUnit f = fuse_unit(u, kappa_in);
    const Shape4 xs{pick(rng, 1, 2), pick(rng, d.kernel, 6), pick(rng, d.kernel, 6),
                    d.in_channels};
    const SignTensor x = random_signs(rng, xs);
    std::int64_t bad = 0, n = 0;
    if (d.out_kind == OutKind::Bit1) {
      const SignTensor want = ref_unit_bits(u, x, kappa_in);
      const SignTensor got = unpack(run_unit_bits(f, pack(x)));
      bad = (want.array() != got.array()).count();
      n = want.size();
    } else {
      const Int4Tensor want = ref_unit_int4(u, x, kappa_in);
      const Int4Tensor got = run_unit_int4(f, pack(x));
      for (std::int64_t i = 0; i < want.size(); ++i) bad += want.get(i) != got.get(i);
      n = want.size();
    }
    ++units;
    elements += n;
    mismatches += bad;
    if (bad && first.empty())
      first = "unit " + std::to_string(units) + " C=" + std::to_string(d.in_channels) +
              " N=" + std::to_string(d.out_channels) + " K=" + std::to_string(d.kernel);
  };

  for (int sc = 0; sc < 4; ++sc)
    for (int i = 0; i < units_per_case; ++i) {
      UnitDraw d;
      d.in_channels = pick(rng, 1, 96);
      d.out_channels = pick(rng, 1, 12);
      d.kernel = pick(rng, 0, 3) == 0 ? 1 : 3;
      d.stride = pick(rng, 1, 2);
      d.sign_case = sc;
      check(d, std::uniform_real_distribution<double>(0.25, 2.0)(rng));
      ++per_case[sc];
    }
  for (int i = 0; i < units_per_case / 5; ++i) {
    UnitDraw d{pick(rng, 1, 40), pick(rng, 1, 8), 3, 1, OutKind::Bit1, i % 4, true};
    check(d, 1.0);
    ++ties;
  }
  for (int i = 0; i < units_per_case / 5; ++i) {
    UnitDraw d{pick(rng, 1, 64), pick(rng, 1, 8), 3, pick(rng, 1, 2), OutKind::Int4};
    check(d, std::uniform_real_distribution<double>(0.25, 2.0)(rng));
    ++int4_units;
  }
  // Whole BiNeal blocks through the graph path.
  std::int64_t block_bad = 0;
  for (int i = 0; i < 40; ++i) {
    const GraphSpec g = build_block(
        {BlockKind::BiNeal, pick(rng, 4, 48), pick(rng, 4, 48), pick(rng, 1, 2)}, 6, 6);
    const Model training = synth_training_model(g, 1000 + i);
    const Model fused = fuse_model(training);
    const RefValue x = random_input(rng, g, 2);
    Trace ref, got;
    ref_forward(training, x, &ref);
    run_graph(fused, to_value(x), {}, &got);
    for (const Layer& l : g.layers) block_bad += count_mismatches(ref.at(l.name), got.at(l.name));
  }
  mismatches += block_bad;

  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << units << " units (sign cases " << per_case[0] << "/" << per_case[1] << "/"
     << per_case[2] << "/" << per_case[3] << ", " << ties << " integer-tie, " << int4_units
     << " int4-output) + 40 blocks, " << elements << " unit elements, " << mismatches
     << " mismatches, " << secs << " s";
  if (!first.empty()) os << "; first bad: " << first;
  const std::int64_t stratified = per_case[0] + per_case[1] + per_case[2] + per_case[3];
  return {1, "Fusion exactness", mismatches == 0 && stratified >= 10000 && secs < 120,
          os.str()};
}

// 2 ------------------------------------------------------------------------

PackedBitTensor pack_nckk(const SignTensor& w) {
  const Shape4 s = w.shape();
  PackedBitTensor out(Shape4{s.d0, s.d2, s.d3, s.d1});
  for (int n = 0; n < s.d0; ++n)
    for (int c = 0; c < s.d1; ++c)
      for (int ky = 0; ky < s.d2; ++ky)
        for (int kx = 0; kx < s.d3; ++kx) out.set_bit(n, ky, kx, c, w(n, c, ky, kx) > 0);
  return out;
}

SignTensor from_mask(Shape4 s, std::uint64_t mask) {
  SignTensor t(s);
  for (std::int64_t i = 0; i < t.size(); ++i) t.array()[i] = (mask >> i) & 1U ? 1 : -1;
  return t;
}

// Compares binary_conv with the float ±1 convolution and the integer oracle.
std::int64_t conv_mismatches(const SignTensor& x, const SignTensor& w, ConvGeometry g) {
  const AccumTensor got = binary_conv(pack(x), pack_nckk(w), g);
  const RealTensor want = ref_conv(w.cast<double>(), x.cast<double>(), g, -1.0);
  oracle::SignVolume v{x.shape().d0, x.shape().d1, x.shape().d2, x.shape().d3, {}};
  for (auto e : x.array()) v.v.push_back(e);
  oracle::SignKernel k{w.shape().d0, w.shape().d1, w.shape().d2, {}};
  for (auto e : w.array()) k.v.push_back(e);
  const auto brute = oracle::conv_pm1(v, k, g.stride, g.padding);
  std::int64_t bad = 0;
  for (std::int64_t i = 0; i < got.size(); ++i)
    bad += got.array()[i] != want.array()[i] || got.array()[i] != brute[i];
  return bad;
}

Verdict xnor_oracle() {
  const auto t0 = Clock::now();
  Rng rng(4242);
  std::int64_t shapes = 0, convs = 0, bad = 0;
  for (int c = 1; c <= 2; ++c)
    for (int k = 1; k <= 3; ++k)
      for (int h = 1; h <= 4; ++h)
        for (int w = 1; w <= 4; ++w)
          for (int stride = 1; stride <= 2; ++stride)
            for (int pad = 0; pad < k; ++pad) {
              const ConvGeometry g{k, stride, pad};
              if (g.out_extent(h) <= 0 || g.out_extent(w) <= 0) continue;
              ++shapes;
              const Shape4 xs{1, h, w, c}, ws{1, c, k, k};
              const int xbits = c * h * w, wbits = c * k * k;
              // Every input pattern against sampled kernels when the input
              // space is small, every kernel pattern against sampled inputs
              // otherwise.
              if (xbits <= 12) {
                for (int r = 0; r < 3; ++r) {
                  const SignTensor wt = random_signs(rng, ws);
                  for (std::uint64_t m = 0; m < (1ULL << xbits); ++m, ++convs)
                    bad += conv_mismatches(from_mask(xs, m), wt, g);
                }
              }
              if (wbits <= 12) {
                for (int r = 0; r < 3; ++r) {
                  const SignTensor xt = random_signs(rng, xs);
                  for (std::uint64_t m = 0; m < (1ULL << wbits); ++m, ++convs)
                    bad += conv_mismatches(xt, from_mask(ws, m), g);
                }
              } else {
                for (int r = 0; r < 256; ++r, ++convs)
                  bad += conv_mismatches(random_signs(rng, xs), random_signs(rng, ws), g);
              }
            }
  std::int64_t sampled = 0;
  for (int i = 0; i < 400; ++i) {
    const int c = i < 8 ? 512 - i : pick(rng, 1, 512);
    const int k = pick(rng, 0, 1) ? 3 : 1;
    const int stride = pick(rng, 1, 2);
    const SignTensor x = random_signs(rng, Shape4{1, pick(rng, k, 6), pick(rng, k, 6), c});
    const SignTensor w = random_signs(rng, Shape4{pick(rng, 1, 4), c, k, k});
    bad += conv_mismatches(x, w, ConvGeometry{k, stride, pick(rng, 0, k / 2)});
    ++sampled;
  }
  std::ostringstream os;
  os << shapes << " small geometries, " << convs << " exhaustive-sweep convolutions, "
     << sampled << " random convolutions up to C=512, " << bad << " mismatches, "
     << seconds_since(t0) << " s";
  return {2, "XNOR-popcount oracle", bad == 0, os.str()};
}

// 3 ------------------------------------------------------------------------

GraphSpec with_extra_normalization(const GraphSpec& g) {
  GraphSpec h = g;
  int k = 0;
  for (const Layer& src : g.layers) {
    if (src.op != OpKind::Conv && src.op != OpKind::EltwiseAdd) continue;
    std::string prev = src.name;
    for (OpKind op : {OpKind::BatchNorm, OpKind::Scale}) {
      const std::string name = "extra" + std::to_string(k++);
      for (Layer& l : h.layers)
        for (auto& in : l.inputs)
          if (in == prev) in = name;
      Layer n;
      n.name = name;
      n.op = op;
      n.inputs = {prev};
      n.N = n.C = src.N;
      n.H_in = n.H_out = src.H_out;
      n.W_in = n.W_out = src.W_out;
      n.in_bits = n.out_bits = src.out_bits;
      n.B = src.B;
      n.boundary = src.boundary;
      h.layers.push_back(n);
      prev = name;
    }
  }
  h.validate();
  return h;
}

Verdict cycle_identities() {
  Rng rng(99);
  int eq_fail = 0, rd_fail = 0, bn_fail = 0, bn_graphs = 0;
  for (int i = 0; i < 1000; ++i) {
    SystolicConfig cfg = SystolicConfig::binary();
    cfg.S = 1 << pick(rng, 2, 8);
    cfg.P = 1 << pick(rng, 6, 12);
    cfg.M = 1 << pick(rng, 4, 9);
    const int N = pick(rng, 1, 1024), C = pick(rng, 1, 1024), K = pick(rng, 1, 7);
    const int W = pick(rng, 1, 112), H = pick(rng, 1, 112);
    if (t_conv_1tob(cfg, N, C, K, W, H, 1) != t_conv_1to1(cfg, N, C, K, W, H)) ++eq_fail;
    const int B = pick(rng, 1, 4);
    const int bits = std::vector<int>{1, 4, 8, 16, 32}[pick(rng, 0, 4)];
    if (t_eltwise(cfg, B, W, H, C, bits) != 2 * t_read(cfg, B, W, H, C, bits)) ++rd_fail;
  }
  std::vector<GraphSpec> graphs;
  for (auto kind : {BlockKind::ResBlock, BlockKind::BiReal, BlockKind::BiNeal}) {
    for (bool ds : {false, true})
      for (int stage = 2; stage <= 4; ++stage) graphs.push_back(table1_block(kind, ds, stage));
    graphs.push_back(build_resnet18(kind, 1.0));
  }
  for (const GraphSpec& g : graphs)
    for (auto placement : {BoundaryPlacement::BinaryArrayBitLines,
                           BoundaryPlacement::EightBitArray, BoundaryPlacement::Excluded}) {
      const CostOptions o{placement};
      const GraphSpec h = with_extra_normalization(g);
      ++bn_graphs;
      if (cycles_network(g, {}, o).total != cycles_network(h, {}, o).total ||
          cycles_block(g, SystolicConfig::binary(), o).total !=
              cycles_block(h, SystolicConfig::binary(), o).total)
        ++bn_fail;
    }
  std::ostringstream os;
  os << "1-to-b at b=1 vs 1-to-1: " << eq_fail << "/1000 differ; eltwise vs 2*read: "
     << rd_fail << "/1000 differ; BatchNorm+Scale insertion: " << bn_fail << "/" << bn_graphs
     << " graphs change";
  return {3, "Cycle-formula identities", eq_fail + rd_fail + bn_fail == 0, os.str()};
}

// 4 ------------------------------------------------------------------------

Verdict area() {
  const AreaReport a = area_report();
  const bool exact = a.eight_bit.pe == 9472 && a.eight_bit.psum == 36800 &&
                     a.eight_bit.total == 46272 && a.binary.pe == 22631 &&
                     a.binary.psum == 179200 && a.binary.total == 201831;
  auto near = [](double got, double want) { return std::abs(got - want) <= 0.01 + 1e-12; };
  const bool ratios = near(round2(a.pe_ratio), 2.4) && near(round2(a.psum_ratio), 4.87) &&
                      near(round2(a.total_ratio), 4.36);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "8-bit %lld/%lld/%lld, binary %lld (from %.1f)/%lld/%lld, ratios %.2f/%.2f/%.2f "
                "vs published 2.4/4.87/4.36",
                static_cast<long long>(a.eight_bit.pe), static_cast<long long>(a.eight_bit.psum),
                static_cast<long long>(a.eight_bit.total), static_cast<long long>(a.binary.pe),
                a.binary_pe_exact, static_cast<long long>(a.binary.psum),
                static_cast<long long>(a.binary.total), round2(a.pe_ratio),
                round2(a.psum_ratio), round2(a.total_ratio));
  return {4, "Area report", exact && ratios, buf};
}

// 5, 6 ---------------------------------------------------------------------

Verdict table1_check() {
  const ReproTable t = table1(3);
  const ShapeSearch s = shape_search();
  const bool chosen_best = s.best_stage == 3;
  std::ostringstream os;
  os << "stage-3 shape; shape search best stage " << s.best_stage << "\n"
     << format_table(t) << format_shape_search(s);
  return {5, "Published block cycles", t.all_pass() && chosen_best, os.str()};
}

Verdict table2_check() {
  const ReproTable t = table2_cycles();
  return {6, "Published network cycles", t.all_pass(), format_table(t)};
}

// 8 ------------------------------------------------------------------------

Verdict determinism() {
  const GraphSpec g = build_block({BlockKind::BiNeal, 64, 128, 2}, 14, 14);
  const Model training = synth_training_model(g, 77);
  const Model fused = fuse_model(training);
  Rng rng(78);
  const Value x = to_value(random_input(rng, g, 2));
  const auto base = encode_tensor(run_graph(fused, x, {1}));
  int run_diff = 0, verify_diff = 0;
  for (int rep = 0; rep < 2; ++rep)
    for (int threads : {1, 2, 3, 8})
      run_diff += encode_tensor(run_graph(fused, x, {threads})) != base;

  const std::string dir = "acceptance_tmp_";
  save_model(training, dir + "t.bnlm");
  std::string verify_base;
  for (int rep = 0; rep < 2; ++rep)
    for (int threads : {1, 4}) {
      std::ostringstream out, err;
      VerifyArgs a;
      a.model = dir + "t.bnlm";
      a.trials = 5;
      a.seed = 3;
      a.threads = threads;
      guarded([&] { return cmd_verify(a, out, err); }, err);
      if (verify_base.empty()) verify_base = out.str();
      verify_diff += out.str() != verify_base;
    }
  save_model(fused, dir + "f.bnlm");
  write_file(dir + "x.bin", encode_tensor(x));
  std::vector<std::uint8_t> cli_base;
  int cli_diff = 0;
  for (int rep = 0; rep < 2; ++rep)
    for (int threads : {1, 4}) {
      std::ostringstream out, err;
      RunArgs a{dir + "f.bnlm", dir + "x.bin", dir + "y.bin", threads};
      guarded([&] { return cmd_run(a, out, err); }, err);
      const auto bytes = read_file(dir + "y.bin");
      if (cli_base.empty()) cli_base = bytes;
      cli_diff += bytes != cli_base || bytes != base;
    }
  for (const char* f : {"t.bnlm", "f.bnlm", "x.bin", "y.bin"}) std::remove((dir + f).c_str());
  std::ostringstream os;
  os << "run_graph: " << run_diff << "/8 outputs differ from the 1-thread bytes; run command: "
     << cli_diff << "/4 output files differ; verify: " << verify_diff
     << "/4 reports differ (\"" << verify_base.substr(0, verify_base.find('\n')) << "\")";
  return {8, "Determinism",
          run_diff == 0 && cli_diff == 0 && verify_diff == 0 && !verify_base.empty(),
          os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  bool strict = false;
  int units_per_case = 2500;
  app.add_flag("--strict", strict, "Exit 1 when any criterion fails");
  app.add_option("--units-per-case", units_per_case, "Fusion units per sign case");
  CLI11_PARSE(app, argc, argv);

  std::vector<Verdict> v;
  try {
    v.push_back(fusion_exactness(units_per_case));
    v.push_back(xnor_oracle());
    v.push_back(cycle_identities());
    v.push_back(area());
    v.push_back(table1_check());
    v.push_back(table2_check());
    v.push_back({7, "Accuracy results replaced by invariant suites",
                 v[0].pass && v[1].pass && v[2].pass,
                 "not reproducible at desk scale; holds when criteria 1-3 hold"});
    v.push_back(determinism());
  } catch (const std::exception& e) {
    std::cerr << "acceptance harness aborted: " << e.what() << "\n";
    return 2;
  }
  std::sort(v.begin(), v.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });

  int passed = 0;
  for (const Verdict& r : v) {
    passed += r.pass;
    std::cout << "[" << (r.pass ? "PASS" : "FAIL") << "] criterion " << r.id << ": " << r.title
              << "\n";
  }
  std::cout << passed << "/" << v.size() << " criteria pass\n\n";
  for (const Verdict& r : v) {
    std::cout << "--- criterion " << r.id << " ---\n" << r.detail;
    if (r.detail.empty() || r.detail.back() != '\n') std::cout << "\n";
  }
  return strict && passed != static_cast<int>(v.size()) ? 1 : 0;
}
