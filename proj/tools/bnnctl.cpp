// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "CLI11.hpp"
#include "bnn/commands.hpp"

int main(int argc, char** argv) {
  using namespace bnn;
  CLI::App app{"Binary network fusion, execution and cycle estimation"};
  app.require_subcommand(1);

  FuseArgs fuse;
  auto* c_fuse = app.add_subcommand("fuse", "Fold a training container into a fused one");
  c_fuse->add_option("--in", fuse.in, "Training container")->required();
  c_fuse->add_option("--out", fuse.out, "Fused container to write")->required();
  c_fuse->add_option("--audit", fuse.audit, "Write the threshold audit log here");
  c_fuse->add_flag("--json", fuse.json, "Audit log as JSON");

  VerifyArgs verify;
  auto* c_verify = app.add_subcommand("verify", "Compare training and fused forward passes");
  c_verify->add_option("--model", verify.model, "Training container")->required();
  c_verify->add_option("--fused", verify.fused, "Fused container (default: fuse --model)");
  c_verify->add_option("--trials", verify.trials, "Random inputs")->capture_default_str();
  c_verify->add_option("--seed", verify.seed, "Input seed")->capture_default_str();
  c_verify->add_option("--batch", verify.batch, "Batch per trial")->capture_default_str();
  c_verify->add_option("--threads", verify.threads, "Engine threads")->capture_default_str();
  c_verify->add_flag("--json", verify.json, "Machine-readable result");

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "Execute a fused container on a tensor blob");
  c_run->add_option("--model", run.model, "Fused container")->required();
  c_run->add_option("--input", run.input, "Input tensor blob")->required();
  c_run->add_option("--out", run.out, "Output tensor blob")->required();
  c_run->add_option("--threads", run.threads, "Engine threads")->capture_default_str();

  CyclesArgs cycles;
  auto* c_cycles = app.add_subcommand("cycles", "Systolic-array cycle report for a graph");
  c_cycles->add_option("--graph", cycles.graph, "Graph JSON")->required();
  c_cycles->add_option("--array", cycles.array, "Array config JSON");
  c_cycles->add_option("--format", cycles.format, "csv or json")->capture_default_str();
  c_cycles->add_option("--boundary", cycles.boundary,
                       "Stem/head placement: binary-bitlines, eight-bit, excluded")
      ->capture_default_str();
  c_cycles->add_flag("--sign-read", cycles.sign_read, "Charge a read for the sum -> 1-bit Sign");
  c_cycles->add_flag("--single-array", cycles.single_array,
                     "Cost every layer on the binary array config");

  AreaArgs area;
  auto* c_area = app.add_subcommand("area", "Array area report and energy bounds");
  c_area->add_option("--array", area.array, "Array config JSON");
  c_area->add_option("--format", area.format, "csv or json")->capture_default_str();

  ReproArgs repro;
  auto* c_repro = app.add_subcommand("repro", "Reproduce the published cycle tables");
  c_repro->add_option("what", repro.what, "table1, table2-cycles or shape-search")->required();
  c_repro->add_option("--array", repro.array, "Array config JSON");
  c_repro->add_option("--format", repro.format, "text or json")->capture_default_str();
  c_repro->add_option("--boundary", repro.boundary, "Stem/head placement")->capture_default_str();
  c_repro->add_option("--stage", repro.stage, "ResNet-18 stage for table1")->capture_default_str();
  c_repro->add_option("--skip-kernel", repro.skip_kernel, "BiNeal skip conv kernel")
      ->capture_default_str();
  c_repro->add_flag("--sign-read", repro.sign_read, "Charge a read for the sum -> 1-bit Sign");
  c_repro->add_flag("--breakdown", repro.breakdown, "Per-layer costs for every row");

  GraphArgs graph;
  auto* c_graph = app.add_subcommand("graph", "Build a block or ResNet-18 graph");
  c_graph->add_option("--kind", graph.kind, "resblock, bireal or bineal")->capture_default_str();
  c_graph->add_option("--network", graph.network, "block or resnet18")->capture_default_str();
  c_graph->add_option("--cin", graph.cin, "Block input channels")->capture_default_str();
  c_graph->add_option("--cout", graph.cout, "Block output channels")->capture_default_str();
  c_graph->add_option("--stride", graph.stride, "Block stride")->capture_default_str();
  c_graph->add_option("--size", graph.size, "Block input height/width")->capture_default_str();
  c_graph->add_option("--skip-kernel", graph.skip_kernel, "BiNeal skip conv kernel")
      ->capture_default_str();
  c_graph->add_option("-m,--multiplier", graph.multiplier, "Channel multiplier")
      ->capture_default_str();
  c_graph->add_flag("!--no-stem", graph.stem, "ResNet-18 without stem");
  c_graph->add_flag("!--no-head", graph.head, "ResNet-18 without classifier");
  c_graph->add_option("--out", graph.out, "Write here instead of stdout");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Random training container for a graph");
  c_synth->add_option("--graph", synth.graph, "Graph JSON")->required();
  c_synth->add_option("--out", synth.out, "Training container to write")->required();
  c_synth->add_option("--input", synth.input, "Also write a random input blob");
  c_synth->add_option("--batch", synth.batch, "Input batch")->capture_default_str();
  c_synth->add_option("--seed", synth.seed, "Parameter seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  return guarded(
      [&]() -> int {
        auto& out = std::cout;
        auto& err = std::cerr;
        if (*c_fuse) return cmd_fuse(fuse, out, err);
        if (*c_verify) {
          if (c_verify->count("--threads") == 0) verify.threads = threads_from_env(1);
          return cmd_verify(verify, out, err);
        }
        if (*c_run) {
          if (c_run->count("--threads") == 0) run.threads = threads_from_env(1);
          return cmd_run(run, out, err);
        }
        if (*c_cycles) return cmd_cycles(cycles, out, err);
        if (*c_area) return cmd_area(area, out, err);
        if (*c_repro) return cmd_repro(repro, out, err);
        if (*c_graph) return cmd_graph(graph, out, err);
        return cmd_synth(synth, out, err);
      },
      std::cerr);
}
