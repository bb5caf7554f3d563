/*
 * Copyright 2026 The AFL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "test_util.h"

namespace {

using afl::testing::TempDir;
using afl::testing::read_file;

struct CliResult {
  int status = -1;
  std::string out;
};

CliResult run(const std::string& args, const std::string& cwd = ".") {
  const std::string cmd = "cd '" + cwd + "' && '" AFL_CLI_PATH "' " + args + " 2>&1";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

double agnostic_line(const std::string& out, const std::string& row) {
  const auto tail = out.find("train agnostic loss");
  const auto pos = out.find(row, tail);
  if (tail == std::string::npos || pos == std::string::npos) return NAN;
  return std::stod(out.substr(pos + row.size()));
}

TEST(Cli, ProjectVector) {
  const CliResult r = run("project 0.6,0.6");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "0.5,0.5\n");
}

TEST(Cli, HelpListsSubcommandsAndThreads) {
  const CliResult r = run("--help");
  EXPECT_EQ(r.status, 0);
  for (const char* s : {"train", "eval", "bound", "synth", "project", "AFL_NUM_THREADS"}) {
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
  }
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(run("train --config " + dir.file("missing.json")).status, 2);
  dir.write("c.json", R"({"dataset": {"kind": "table", "train": "nope.csv"}})");
  EXPECT_EQ(run("train --config c.json", dir.path().string()).status, 2);
  EXPECT_EQ(run("train --dataset nope.csv", dir.path().string()).status, 2);
  dir.write("bad.json", "{ not json");
  EXPECT_EQ(run("train --config bad.json", dir.path().string()).status, 2);
  EXPECT_EQ(run("train --mode sideways --dataset prop1").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("eval --model " + dir.file("none.model") + " --dataset prop1").status, 2);
  EXPECT_EQ(run("eval --model " + dir.file("none.model") + " --config c.json", dir.path().string()).status, 2);
  std::string out_file = dir.file("blocked");
  dir.write("blocked", "");
  EXPECT_EQ(run("synth prop1 --n 4 --out " + out_file + "/x.csv").status, 4);
}

TEST(Cli, SynthThenTrainReachesLog2) {
  TempDir dir;
  const std::string d = dir.path().string();
  ASSERT_EQ(run("synth prop1 --n 4 --out p.csv", d).status, 0);
  const CliResult r = run("train --mode afl --dataset p.csv --radius 3 --iterations 5000 --out o", d);
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NEAR(agnostic_line(r.out, "L_D_Lambda"), std::log(2.0), 0.01) << r.out;
}

TEST(Cli, Prop1AllModes) {
  TempDir dir;
  const CliResult r = run("train --mode all --dataset prop1 --radius 3 --iterations 5000 --out o",
                    dir.path().string());
  ASSERT_EQ(r.status, 0) << r.out;
  for (const char* row : {"L_all_class_1", "L_balanced", "L_U", "L_D_Lambda"}) {
    EXPECT_NE(r.out.find(row), std::string::npos) << row;
  }
  EXPECT_NEAR(agnostic_line(r.out, "L_U"), std::log(4.0 / std::sqrt(3.0)), 0.01);
  EXPECT_NEAR(agnostic_line(r.out, "L_D_Lambda"), std::log(2.0), 0.01);
  const std::string csv = read_file(dir.file("o/summary.csv"));
  EXPECT_EQ(csv.rfind("# config_hash=", 0), 0u);
}

TEST(Cli, RunsAreReproducibleAndTagged) {
  TempDir dir;
  const std::string d = dir.path().string();
  const std::string args = "--mode afl --dataset prop1 --iterations 500 --log-interval 50 --seeds 2 --seed 3";
  ASSERT_EQ(run("train " + args + " --out a", d).status, 0);
  ASSERT_EQ(run("train " + args + " --out b", d).status, 0);
  for (const char* f : {"afl_s3.jsonl", "afl_s4.jsonl"}) {
    const std::string a = read_file(dir.file(std::string("a/") + f));
    ASSERT_FALSE(a.empty());
    EXPECT_EQ(a, read_file(dir.file(std::string("b/") + f)));
  }
  const std::string jsonl = read_file(dir.file("a/afl_s3.jsonl"));
  const auto header = nlohmann::json::parse(jsonl.substr(0, jsonl.find('\n')));
  EXPECT_EQ(header["record"], "header");
  EXPECT_EQ(header["seed"], 3);
  EXPECT_EQ(header["config_hash"].get<std::string>().size(), 16u);
  const std::string hash = header["config_hash"];
  EXPECT_NE(read_file(dir.file("a/afl_s3.model.meta")).find("config_hash=" + hash), std::string::npos);
  EXPECT_NE(read_file(dir.file("a/afl_s3.model.meta")).find("seed=3"), std::string::npos);
  EXPECT_NE(read_file(dir.file("a/afl_s3.metrics.json")).find(hash), std::string::npos);
  EXPECT_NE(read_file(dir.file("a/summary.txt")).find("seeds=3..4"), std::string::npos);
  const CliResult other = run("train --mode afl --dataset prop1 --iterations 500 --seed 9 --out c", d);
  EXPECT_NE(read_file(dir.file("c/afl_s9.jsonl")), read_file(dir.file("a/afl_s3.jsonl")));
  EXPECT_EQ(other.status, 0);
}

TEST(Cli, EvalSavedModel) {
  TempDir dir;
  const std::string d = dir.path().string();
  ASSERT_EQ(run("synth prop1 --n 10 --out p.csv", d).status, 0);
  ASSERT_EQ(run("train --mode uniform --dataset p.csv --radius 3 --iterations 2000 --out o", d).status, 0);
  const CliResult r = run("eval --model o/uniform_s1.model --data p.csv --out m.json", d);
  ASSERT_EQ(r.status, 0) << r.out;
  const auto j = nlohmann::json::parse(read_file(dir.file("m.json")));
  ASSERT_TRUE(j.contains("accuracies")) << j.dump();
  EXPECT_EQ(j["accuracies"].size(), 2u);
}

TEST(Cli, BoundSingletonMeanMatchesStandardDeviation) {
  const CliResult r = run(
      "bound --sizes 300,200 --vc-dimension 3 --loss-bound 1 --delta 0.05 "
      "--lambda-domain '{\"vertices\":[[0.6,0.4]]}' --variant max --empirical-loss 0.2 --format json");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  const auto& rep = j["reports"][0];
  EXPECT_NEAR(rep["deviation_term"].get<double>(), std::sqrt(std::log(1 / 0.05) / 1000.0), 1e-15);
  EXPECT_EQ(rep["skewness"].get<double>(), 1.0);
  const CliResult text = run("bound --sizes 300,200 --vc-dimension 3 --epsilon 0.1 --format text --variant all "
                       "--l1 0.1 --rademacher 0.1,0.2 --lambda 0.5,0.5");
  EXPECT_EQ(text.status, 0) << text.out;
  for (const char* v : {"max_over_lambda", "per_lambda", "corollary", "per_domain"}) {
    EXPECT_NE(text.out.find(v), std::string::npos) << v;
  }
  EXPECT_EQ(run("bound --sizes 300,200 --delta 2").status, 2);
}

TEST(Cli, SynthGaussianFromConfig) {
  TempDir dir;
  dir.write("g.json", R"({"dataset": {"kind": "gaussian", "num_classes": 3, "domains": [
      {"mean": [0, 0], "count": 30}, {"mean": [1, 1], "covariance_scale": 0.5, "count": 10}]}})");
  const std::string d = dir.path().string();
  ASSERT_EQ(run("synth gaussian --config g.json --seed 4 --out a.csv", d).status, 0);
  ASSERT_EQ(run("synth gaussian --config g.json --seed 4 --out b.csv", d).status, 0);
  EXPECT_EQ(read_file(dir.file("a.csv")), read_file(dir.file("b.csv")));
  EXPECT_EQ(run("synth prop1 --n 3 --out odd.csv", d).status, 2);
  EXPECT_EQ(run("synth prop1 --n 3 --allow-odd --out odd.csv", d).status, 0);
}

TEST(Cli, OracleSubcommand) {
  const CliResult r = run("oracle prop1");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("0.693147"), std::string::npos) << r.out;
}

}  // namespace
