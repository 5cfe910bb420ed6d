// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

namespace bnn {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitInputError = 2;

struct FuseArgs {
  std::string in, out;
  std::string audit;  // optional file; empty prints to stdout
  bool json = false;
};

struct VerifyArgs {
  std::string model;
  std::string fused;  // optional; fused from `model` when empty
  int trials = 1000;
  std::uint64_t seed = 1;
  int batch = 1;
  int threads = 1;
  bool json = false;
};

struct RunArgs {
  std::string model, input, out;
  int threads = 1;
};

struct CyclesArgs {
  std::string graph;
  std::string array;  // optional
  std::string format = "csv";
  std::string boundary = "binary-bitlines";
  bool sign_read = false;
  bool single_array = false;  // cost every layer on the binary config
};

struct AreaArgs {
  std::string array;
  std::string format = "csv";
};

struct ReproArgs {
  std::string what;  // table1 | table2-cycles | shape-search
  std::string array;
  std::string format = "text";
  std::string boundary = "binary-bitlines";
  int stage = 3;
  int skip_kernel = 3;
  bool sign_read = false;
  bool breakdown = false;
};

struct GraphArgs {
  std::string kind = "bineal";
  std::string network = "block";  // block | resnet18
  int cin = 64, cout = 64, stride = 1, size = 14, skip_kernel = 3;
  double multiplier = 1.0;
  bool stem = true, head = true;
  std::string out;  // empty prints to stdout
};

struct SynthArgs {
  std::string graph, out;
  std::string input;  // optional random input blob
  int batch = 1;
  std::uint64_t seed = 1;
};

int cmd_fuse(const FuseArgs& a, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err);
int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err);
int cmd_cycles(const CyclesArgs& a, std::ostream& out, std::ostream& err);
int cmd_area(const AreaArgs& a, std::ostream& out, std::ostream& err);
int cmd_repro(const ReproArgs& a, std::ostream& out, std::ostream& err);
int cmd_graph(const GraphArgs& a, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err);

/// Runs `body`, mapping library errors to kExitInputError with a message.
int guarded(const std::function<int()>& body, std::ostream& err);

/// Thread count from BNN_THREADS when set, else `fallback`.
int threads_from_env(int fallback);

}  // namespace bnn
