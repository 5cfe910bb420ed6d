// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnn/repro.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

namespace bnn {

namespace {

struct Table1Spec {
  const char* label;
  BlockKind kind;
  bool downsample;
  double published;
};

constexpr Table1Spec kTable1[] = {
    {"ResBlock w/o downsample", BlockKind::ResBlock, false, 916.0e3},
    {"Bi-Real w/o downsample", BlockKind::BiReal, false, 63.0e3},
    {"BiNeal w/o downsample", BlockKind::BiNeal, false, 32.5e3},
    {"ResBlock with downsample", BlockKind::ResBlock, true, 715.4e3},
    {"Bi-Real with downsample", BlockKind::BiReal, true, 103.9e3},
    {"BiNeal with downsample", BlockKind::BiNeal, true, 26.3e3},
};

std::string fmt(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

}  // namespace

bool ReproRow::pass() const { return std::abs(rel_error()) <= tolerance + 1e-12; }

bool ReproTable::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass()) return false;
  return true;
}

StageShape resnet18_stage(int stage) {
  if (stage < 1 || stage > 4) throw InvalidParam("ResNet-18 stage must be 1..4");
  return {stage, 64 << (stage - 1), 56 >> (stage - 1)};
}

GraphSpec table1_block(BlockKind kind, bool downsample, int stage, int skip_kernel) {
  const StageShape s = resnet18_stage(stage);
  BlockSpec spec;
  spec.kind = kind;
  spec.cout = s.channels;
  spec.skip_kernel = skip_kernel;
  if (!downsample) {
    spec.cin = s.channels;
    return build_block(spec, s.size, s.size);
  }
  if (stage < 2) throw InvalidParam("stage 1 has no downsample block");
  spec.cin = s.channels / 2;
  spec.stride = 2;
  return build_block(spec, s.size * 2, s.size * 2);
}

ReproTable table1(int stage, const ArrayPair& arrays, const CostOptions& opts,
                  int skip_kernel) {
  ReproTable t;
  t.title = "Block cycles, ResNet-18 stage " + std::to_string(stage) + " shape";
  for (const auto& row : kTable1) {
    ReproRow r;
    r.label = row.label;
    r.published = row.published;
    r.tolerance = 0.10;
    r.breakdown = cycles_network(table1_block(row.kind, row.downsample, stage, skip_kernel),
                                 arrays, opts);
    r.computed = r.breakdown.total;
    t.rows.push_back(std::move(r));
  }
  return t;
}

ShapeSearch shape_search(const ArrayPair& arrays, const CostOptions& opts, int skip_kernel) {
  ShapeSearch out;
  for (const auto& row : kTable1) out.labels.push_back(row.label);
  double best = std::numeric_limits<double>::infinity();
  for (int stage = 2; stage <= 4; ++stage) {
    ShapeCandidate c;
    c.stage = stage;
    for (const auto& row : table1(stage, arrays, opts, skip_kernel).rows) {
      c.row_errors.push_back(row.rel_error());
      c.mean_abs_error += std::abs(row.rel_error());
    }
    c.mean_abs_error /= static_cast<double>(c.row_errors.size());
    if (c.mean_abs_error < best) {
      best = c.mean_abs_error;
      out.best_stage = stage;
    }
    out.candidates.push_back(std::move(c));
  }
  for (const auto& row : kTable1) {
    int best_stage = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (int stage = row.downsample ? 2 : 1; stage <= 4; ++stage) {
      const Cycles c = cycles_network(
          table1_block(row.kind, row.downsample, stage, skip_kernel), arrays, opts).total;
      const double err = std::abs((c - row.published) / row.published);
      if (err < best_err) {
        best_err = err;
        best_stage = stage;
      }
    }
    out.per_row_best.push_back(best_stage);
  }
  return out;
}

ReproTable table2_cycles(const ArrayPair& arrays, const CostOptions& opts) {
  ReproTable t;
  t.title = "ResNet-18 family network cycles, 224x224x3 input";
  t.unit = 1e6;
  t.unit_suffix = "M";
  const auto add = [&](std::string label, BlockKind kind, double m, double published,
                       double tol) {
    ReproRow r;
    r.label = std::move(label);
    r.published = published;
    r.tolerance = tol;
    r.breakdown = cycles_network(build_resnet18(kind, m), arrays, opts);
    r.computed = r.breakdown.total;
    t.rows.push_back(std::move(r));
  };
  add("ResNet-18 (8-bit)", BlockKind::ResBlock, 1.0, 7.47e6, 0.10);
  add("Bi-Real-18", BlockKind::BiReal, 1.0, 1.65e6, 0.20);
  const std::map<double, double> bineal{{0.5, 0.74e6}, {0.75, 0.80e6}, {1.0, 0.84e6},
                                        {1.25, 1.00e6}, {1.5, 1.06e6}, {1.75, 1.17e6},
                                        {2.0, 1.25e6}};
  for (const auto& [m, published] : bineal)
    add("BiNeal-" + fmt(m, 2) + "x", BlockKind::BiNeal, m, published, 0.20);
  return t;
}

std::string format_table(const ReproTable& t, bool with_breakdown) {
  std::ostringstream os;
  os << t.title << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %12s %12s %9s %6s  %s\n", "row",
                ("published " + t.unit_suffix).c_str(),
                ("computed " + t.unit_suffix).c_str(), "rel.err", "tol", "status");
  os << line;
  for (const auto& r : t.rows) {
    std::snprintf(line, sizeof line, "%-28s %12.3f %12.3f %+8.2f%% %5.0f%%  %s\n",
                  r.label.c_str(), r.published / t.unit, r.computed / t.unit,
                  100.0 * r.rel_error(), 100.0 * r.tolerance, r.pass() ? "ok" : "OUTSIDE");
    os << line;
    if (with_breakdown || !r.pass()) {
      for (const auto& e : r.breakdown.entries) {
        if (e.cycles == 0) continue;
        std::snprintf(line, sizeof line, "    %-26s %-12s %-10s %-9s %10lld\n",
                      e.layer.c_str(), e.op.c_str(), e.formula.c_str(),
                      e.array.c_str(), static_cast<long long>(e.cycles));
        os << line;
      }
    }
  }
  return os.str();
}

std::string format_shape_search(const ShapeSearch& s) {
  std::ostringstream os;
  os << "Joint fit of all six block rows per ResNet-18 stage shape\n";
  for (const auto& c : s.candidates) {
    const StageShape sh = resnet18_stage(c.stage);
    os << "  stage " << c.stage << " (" << sh.size << "x" << sh.size << "x" << sh.channels
       << "): mean |rel.err| " << fmt(100.0 * c.mean_abs_error, 2) << "%  [";
    for (std::size_t i = 0; i < c.row_errors.size(); ++i)
      os << (i ? " " : "") << fmt(100.0 * c.row_errors[i], 1) << "%";
    os << "]" << (c.stage == s.best_stage ? "  <- best" : "") << "\n";
  }
  os << "Best stage per row\n";
  for (std::size_t i = 0; i < s.labels.size(); ++i)
    os << "  " << s.labels[i] << ": stage " << s.per_row_best[i] << "\n";
  return os.str();
}

std::string to_json(const ReproTable& t, int indent) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"label", r.label},
                    {"published", r.published},
                    {"computed", r.computed},
                    {"rel_error", r.rel_error()},
                    {"tolerance", r.tolerance},
                    {"pass", r.pass()}});
  return nlohmann::json{{"title", t.title}, {"rows", rows}}.dump(indent);
}

}  // namespace bnn
