// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bnn/commands.hpp"
#include "bnn/model.hpp"
#include "bnn/network.hpp"

namespace bnn {
namespace {

struct Result {
  int code = -1;
  std::string out;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = ::testing::TempDir() + "bnn_cli/";
    std::filesystem::create_directories(dir_);
    ASSERT_EQ(run("graph --kind bineal --cin 16 --cout 32 --stride 2 --size 7 --out " +
                  path("g.json")).code, 0);
    ASSERT_EQ(run("synth --graph " + path("g.json") + " --out " + path("t.bnlm") +
                  " --input " + path("x.bin") + " --batch 2 --seed 4").code, 0);
    ASSERT_EQ(run("fuse --in " + path("t.bnlm") + " --out " + path("f.bnlm") +
                  " --audit " + path("audit.csv")).code, 0);
  }

  static std::string path(const std::string& name) { return dir_ + name; }

  static Result run(const std::string& args, const std::string& env = "") {
    const std::string log = dir_ + "last.log";
    const std::string cmd = env + " " BNNCTL_PATH " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
  }

  static inline std::string dir_;
};

TEST_F(Cli, VerifyPasses) {
  const Result r = run("verify --model " + path("t.bnlm") + " --trials 20");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.rfind("0 mismatches (20 trials", 0), 0u) << r.out;
  const Result f = run("verify --model " + path("t.bnlm") + " --fused " + path("f.bnlm") +
                       " --trials 5 --json");
  EXPECT_EQ(f.code, 0) << f.out;
  EXPECT_NE(f.out.find("\"mismatches\": 0"), std::string::npos);
}

TEST_F(Cli, AuditLog) {
  const std::string audit = slurp(path("audit.csv"));
  EXPECT_EQ(audit.rfind("layer,channel,theta,theta_int,direction\n", 0), 0u);
  EXPECT_NE(audit.find("\nblock.conv1,0,"), std::string::npos);
  EXPECT_NE(audit.find("\nblock.out,31,"), std::string::npos);
}

TEST_F(Cli, VerifyCatchesCorruptThreshold) {
  Model f = load_model(path("f.bnlm"));
  ChannelThresholds t = load_thresholds(f, "block.conv1");
  for (auto& v : t.theta_int) v += 3;
  store_thresholds(f, "block.conv1", t);
  save_model(f, path("bad_theta.bnlm"));
  const Result r = run("verify --model " + path("t.bnlm") + " --fused " +
                       path("bad_theta.bnlm") + " --trials 3");
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("first mismatch: trial 0, layer 'block.conv1'"), std::string::npos) << r.out;
}

TEST_F(Cli, VerifyCatchesFlippedDirection) {
  Model f = load_model(path("f.bnlm"));
  ChannelThresholds t = load_thresholds(f, "block.out");
  t.direction[0] = t.direction[0] == Direction::GE ? Direction::LE : Direction::GE;
  store_thresholds(f, "block.out", t);
  save_model(f, path("bad_dir.bnlm"));
  const Result r = run("verify --model " + path("t.bnlm") + " --fused " +
                       path("bad_dir.bnlm") + " --trials 3");
  EXPECT_EQ(r.code, 1) << r.out;
}

TEST_F(Cli, ZeroTauIsInputError) {
  Model m = load_model(path("t.bnlm"));
  Eigen::ArrayXd tau = m.reals("block.conv1.tau");
  tau[0] = 0;
  m.tensors["block.conv1.tau"] = Blob::f64(tau);
  save_model(m, path("zero_tau.bnlm"));
  const Result r = run("fuse --in " + path("zero_tau.bnlm") + " --out " + path("z.bnlm"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("DegenerateChannel"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("conv1"), std::string::npos) << r.out;
}

TEST_F(Cli, InputErrors) {
  EXPECT_EQ(run("fuse --in " + path("nothing.bnlm") + " --out " + path("o.bnlm")).code, 2);
  EXPECT_EQ(run("verify").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("run --model " + path("t.bnlm") + " --input " + path("x.bin") + " --out " +
                path("y.bin")).code, 2);
  EXPECT_EQ(run("repro table9").code, 2);
  EXPECT_EQ(run("verify --model " + path("t.bnlm") + " --trials 1", "BNN_THREADS=zero").code,
            2);
  std::ofstream(path("broken.json")) << R"({"schema":"bnn.graph","version":1,"layers":[{}]})";
  const Result r = run("cycles --graph " + path("broken.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("ParseError"), std::string::npos) << r.out;
}

TEST_F(Cli, RunIsDeterministic) {
  ASSERT_EQ(run("run --model " + path("f.bnlm") + " --input " + path("x.bin") + " --out " +
                path("y1.bin") + " --threads 1").code, 0);
  ASSERT_EQ(run("run --model " + path("f.bnlm") + " --input " + path("x.bin") + " --out " +
                path("y2.bin") + " --threads 4").code, 0);
  ASSERT_EQ(run("run --model " + path("f.bnlm") + " --input " + path("x.bin") + " --out " +
                path("y3.bin"), "BNN_THREADS=3").code, 0);
  const std::string y1 = slurp(path("y1.bin"));
  EXPECT_FALSE(y1.empty());
  EXPECT_EQ(slurp(path("y2.bin")), y1);
  EXPECT_EQ(slurp(path("y3.bin")), y1);
  const Value y = decode_tensor(read_file(path("y1.bin")));
  EXPECT_EQ(shape_of(y), (Shape4{2, 4, 4, 32}));
}

TEST_F(Cli, CostCommands) {
  ASSERT_EQ(run("graph --kind bineal --size 14 --cin 256 --cout 256 --out " +
                path("b3.json")).code, 0);
  Result r = run("cycles --graph " + path("b3.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("total,,,,32128"), std::string::npos) << r.out;
  r = run("area");
  EXPECT_NE(r.out.find("201831"), std::string::npos) << r.out;
  r = run("repro table1");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("OUTSIDE"), std::string::npos);
  EXPECT_NE(r.out.find("block.sign1"), std::string::npos) << "failing rows carry a breakdown";
  r = run("repro shape-search");
  EXPECT_EQ(r.code, 0);
}

TEST(Guarded, MapsErrors) {
  std::ostringstream err;
  EXPECT_EQ(guarded([]() -> int { throw GraphError("boom"); }, err), kExitInputError);
  EXPECT_NE(err.str().find("GraphError: boom"), std::string::npos);
  EXPECT_EQ(guarded([] { return kExitVerifyFailed; }, err), kExitVerifyFailed);
}

}  // namespace
}  // namespace bnn
