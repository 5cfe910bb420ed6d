// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnn/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "bnn/costmodel.hpp"
#include "bnn/network.hpp"
#include "bnn/repro.hpp"
#include "bnn/synth.hpp"
#include "json.hpp"

namespace bnn {

using nlohmann::json;

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitInputError;
}

int threads_from_env(int fallback) {
  const char* v = std::getenv("BNN_THREADS");
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1 || n > 1024)
    throw InvalidParam(std::string("BNN_THREADS must be a positive integer, got '") + v + "'");
  return static_cast<int>(n);
}

int cmd_fuse(const FuseArgs& a, std::ostream& out, std::ostream&) {
  const Model training = load_model(a.in);
  if (training.kind != ModelKind::Training)
    throw InvalidParam("'" + a.in + "' is not a training container");
  std::vector<AuditEntry> audit;
  const Model fused = fuse_model(training, &audit);
  fused.validate();
  save_model(fused, a.out);

  std::ofstream file;
  if (!a.audit.empty()) {
    file.open(a.audit);
    if (!file) throw IoError("cannot write audit log '" + a.audit + "'");
  }
  std::ostream& log = a.audit.empty() ? out : file;
  if (a.json) {
    json rows = json::array();
    for (const auto& e : audit)
      rows.push_back({{"layer", e.layer},
                      {"channel", e.channel},
                      {"theta", e.theta},
                      {"theta_int", e.theta_int},
                      {"direction", e.direction == Direction::GE ? "GE" : "LE"}});
    log << rows.dump(2) << "\n";
  } else {
    log << "layer,channel,theta,theta_int,direction\n";
    for (const auto& e : audit)
      log << e.layer << ',' << e.channel << ',' << std::setprecision(17) << e.theta << ','
          << e.theta_int << ',' << (e.direction == Direction::GE ? "GE" : "LE") << '\n';
  }
  return kExitOk;
}

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  if (a.trials < 1) throw InvalidParam("--trials must be >= 1");
  if (a.batch < 1) throw InvalidParam("--batch must be >= 1");
  const Model training = load_model(a.model);
  if (training.kind != ModelKind::Training)
    throw InvalidParam("'" + a.model + "' is not a training container");
  const Model fused = a.fused.empty() ? fuse_model(training) : load_model(a.fused);
  if (fused.kind != ModelKind::Fused) throw InvalidParam("'" + a.fused + "' is not fused");
  if (!(fused.graph == training.graph))
    throw GraphError("fused and training containers describe different graphs");

  ExecOptions opts{a.threads};
  Rng rng(a.seed);
  std::int64_t mismatches = 0, compared = 0;
  std::optional<Mismatch> first;
  int first_trial = -1;
  const auto order = training.graph.layers.empty() ? std::vector<int>{}
                                                   : training.graph.topological_order();
  for (int t = 0; t < a.trials; ++t) {
    const RefValue x = random_input(rng, training.graph, a.batch);
    Trace ref, got;
    ref_forward(training, x, &ref);
    run_graph(fused, to_value(x), opts, &got);
    for (int i : order) {
      const std::string& name = training.graph.layers[i].name;
      const Value& e = ref.at(name);
      const Value& g = got.at(name);
      compared += shape_of(e).size();
      const std::int64_t n = count_mismatches(e, g);
      if (n && !first) {
        first = compare_values(e, g);
        first->layer = name;
        first_trial = t;
      }
      mismatches += n;
    }
  }
  if (a.json) {
    json j{{"trials", a.trials}, {"seed", a.seed}, {"elements", compared},
           {"mismatches", mismatches}};
    if (first)
      j["first"] = {{"trial", first_trial}, {"layer", first->layer}, {"b", first->b},
                    {"y", first->y}, {"x", first->x}, {"c", first->c},
                    {"expected", first->expected}, {"actual", first->actual}};
    out << j.dump(2) << "\n";
  } else {
    out << mismatches << " mismatches (" << a.trials << " trials, " << compared
        << " elements, seed " << a.seed << ")\n";
    if (first) out << "first mismatch: trial " << first_trial << ", " << first->str() << "\n";
  }
  if (mismatches) {
    err << "verification failed\n";
    return kExitVerifyFailed;
  }
  return kExitOk;
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream&) {
  const Model fused = load_model(a.model);
  if (fused.kind != ModelKind::Fused)
    throw InvalidParam("'" + a.model + "' is not a fused container (run 'fuse' first)");
  const Value x = decode_tensor(read_file(a.input));
  const Value y = run_graph(fused, x, ExecOptions{a.threads});
  write_file(a.out, encode_tensor(y));
  out << "wrote " << shape_of(y).str() << " " << bits_of(y) << "-bit tensor to " << a.out
      << "\n";
  return kExitOk;
}

namespace {

ArrayPair arrays_or_default(const std::string& path) {
  return path.empty() ? ArrayPair{} : load_arrays(path);
}

CostOptions cost_options(const std::string& boundary, bool sign_read) {
  CostOptions o;
  o.boundary = boundary_placement_from_string(boundary);
  o.pipeline_sign = !sign_read;
  return o;
}

}  // namespace

int cmd_cycles(const CyclesArgs& a, std::ostream& out, std::ostream&) {
  const GraphSpec g = load_graph(a.graph);
  const ArrayPair arrays = arrays_or_default(a.array);
  const CostOptions o = cost_options(a.boundary, a.sign_read);
  const CycleReport r =
      a.single_array ? cycles_block(g, arrays.binary, o) : cycles_network(g, arrays, o);
  if (a.format == "json")
    out << to_json(r) << "\n";
  else if (a.format == "csv")
    out << to_csv(r);
  else
    throw InvalidParam("--format must be csv or json");
  return kExitOk;
}

int cmd_area(const AreaArgs& a, std::ostream& out, std::ostream&) {
  const AreaReport r = area_report(CellAreas{}, arrays_or_default(a.array));
  if (a.format == "json") {
    out << to_json(r) << "\n";
  } else if (a.format == "csv") {
    out << to_csv(r);
    const EnergyBounds e = energy_bounds(r);
    out << std::fixed << std::setprecision(2) << "energy_bounds," << e.lower << ','
        << e.upper << ",\n";
  } else {
    throw InvalidParam("--format must be csv or json");
  }
  return kExitOk;
}

int cmd_repro(const ReproArgs& a, std::ostream& out, std::ostream&) {
  const ArrayPair arrays = arrays_or_default(a.array);
  const CostOptions o = cost_options(a.boundary, a.sign_read);
  if (a.what == "shape-search") {
    out << format_shape_search(shape_search(arrays, o, a.skip_kernel));
    return kExitOk;
  }
  ReproTable t;
  if (a.what == "table1")
    t = table1(a.stage, arrays, o, a.skip_kernel);
  else if (a.what == "table2-cycles")
    t = table2_cycles(arrays, o);
  else
    throw InvalidParam("unknown table '" + a.what +
                       "' (expected table1, table2-cycles or shape-search)");
  if (a.format == "json")
    out << to_json(t) << "\n";
  else
    out << format_table(t, a.breakdown);
  return kExitOk;
}

int cmd_graph(const GraphArgs& a, std::ostream& out, std::ostream&) {
  const auto kind = block_kind_from_string(a.kind);
  if (!kind) throw InvalidParam("unknown block kind '" + a.kind + "'");
  GraphSpec g;
  if (a.network == "resnet18") {
    ResNetOptions opts;
    opts.include_stem = a.stem;
    opts.include_head = a.head;
    g = build_resnet18(*kind, a.multiplier, opts);
  } else if (a.network == "block") {
    BlockSpec s;
    s.kind = *kind;
    s.cin = a.cin;
    s.cout = a.cout;
    s.stride = a.stride;
    s.multiplier = a.multiplier;
    s.skip_kernel = a.skip_kernel;
    g = build_block(s, a.size, a.size);
  } else {
    throw InvalidParam("--network must be block or resnet18");
  }
  g.validate();
  if (a.out.empty())
    out << to_json(g) << "\n";
  else
    save_graph(g, a.out);
  return kExitOk;
}

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream&) {
  const Model m = synth_training_model(load_graph(a.graph), a.seed);
  save_model(m, a.out);
  out << "wrote training container with " << m.tensors.size() << " tensors to " << a.out
      << "\n";
  if (!a.input.empty()) {
    Rng rng(a.seed ^ 0x9e3779b97f4a7c15ULL);
    const Value x = to_value(random_input(rng, m.graph, a.batch));
    write_file(a.input, encode_tensor(x));
    out << "wrote input " << shape_of(x).str() << " to " << a.input << "\n";
  }
  return kExitOk;
}

}  // namespace bnn
