// Copyright 2026 The ResMem Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "resmem/cli.h"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "resmem/datastore.h"
#include "resmem/synthetic.h"
#include "test_util.h"

namespace resmem {
namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string ReadText(const std::string& path) {
  const auto bytes = testing::ReadBytes(path);
  return {bytes.begin(), bytes.end()};
}

TEST(CliTest, UsageErrors) {
  EXPECT_EQ(Cli({}).code, kExitUsage);
  EXPECT_EQ(Cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Cli({"eval", "--data", "x.rmem"}).code, kExitUsage);
  EXPECT_EQ(Cli({"theory-sim", "--trials", "0"}).code, kExitUsage);
  EXPECT_EQ(Cli({"sweep", "--train", "a", "--val", "b", "--rule", "best"}).code, kExitUsage);
}

TEST(CliTest, HelpExitsCleanly) {
  const CliRun r = Cli({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("theory-sim"), std::string::npos);
}

TEST(CliTest, DataErrorsExitTwo) {
  testing::TempDir dir;
  EXPECT_EQ(Cli({"train-base", "--data", dir.File("missing.rmem"), "--out", dir.File("m")}).code,
            kExitData);
  testing::WriteBytes(dir.File("bad.rmem"), {'N', 'O', 'P', 'E', 0, 0, 0, 0});
  const CliRun r = Cli({"build-index", "--data", dir.File("bad.rmem"), "--out", dir.File("i")});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(CliTest, NumericFailureExitsThree) {
  testing::TempDir dir;
  std::ofstream(dir.File("t.csv")) << "# comment\nn,t1_mean\n16,0.5\n32,0\n64,0.1\n";
  EXPECT_EQ(Cli({"rate-fit", "--in", dir.File("t.csv")}).code, kExitNumeric);
}

TEST(CliTest, TheorySimWritesTableAndEchoesConfig) {
  testing::TempDir dir;
  const CliRun r = Cli({"theory-sim", "--n-grid", "8,16,32", "--trials", "4", "--m-test", "10",
                     "--out", dir.File("t.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("# resmem 1.0.0 theory-sim d=2 L=0.5 n-grid=8,16,32", 0), 0u);
  EXPECT_NE(r.out.find("decomposition_violations=0"), std::string::npos);
  const std::string file = ReadText(dir.File("t.csv"));
  std::istringstream lines(file);
  std::string header, columns;
  std::getline(lines, header);
  std::getline(lines, columns);
  EXPECT_EQ(header[0], '#');
  EXPECT_EQ(header.find("threads"), std::string::npos);
  EXPECT_EQ(columns, "n,total_mean,total_se,t1_mean,t1_se,t2_mean,t2_se,erm_mean,erm_se,nn_mean,nn_se");
  const CliRun fit = Cli({"rate-fit", "--in", dir.File("t.csv"), "--field", "erm"});
  EXPECT_EQ(fit.code, kExitOk) << fit.err;
  EXPECT_NE(fit.out.find("rows=3 slope="), std::string::npos);
}

TEST(CliTest, OutputsAreByteIdenticalAcrossRunsAndThreads) {
  testing::TempDir dir;
  const std::vector<std::string> base = {"znn-check", "--n-grid", "4,16,64", "--trials", "200"};
  auto run = [&](const std::string& name, const std::string& threads) {
    auto args = base;
    args.insert(args.end(), {"--threads", threads, "--out", dir.File(name)});
    EXPECT_EQ(Cli(args).code, kExitOk);
    return testing::ReadBytes(dir.File(name));
  };
  const auto a = run("a.csv", "1");
  EXPECT_EQ(run("b.csv", "1"), a);
  EXPECT_EQ(run("c.csv", "6"), a);
}

TEST(CliTest, DemoSynthWritesLabeledDataset) {
  testing::TempDir dir;
  const CliRun r = Cli({"demo-synth", "--n", "300", "--d", "5", "--c", "4", "--seed", "3", "--out",
                     dir.File("s.rmem")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const EmbeddingDataset ds = LoadDataset(dir.File("s.rmem"));
  EXPECT_EQ(ds.n, 300u);
  EXPECT_EQ(ds.d, 5u);
  EXPECT_EQ(ds.c, 4u);
  EXPECT_FALSE(ds.logits.has_value());
  EXPECT_EQ(ds, DemoSynthetic(3, 300, 5, 4));
}

TEST(SyntheticTest, EveryClassAppearsWhenNEqualsC) {
  const SyntheticTask task = MakeSyntheticTask(1, 6, 3, 6);
  std::vector<int> seen(6, 0);
  for (std::uint64_t i = 0; i < 6; ++i) ++seen[task.data.label(i)];
  EXPECT_EQ(seen, std::vector<int>(6, 1));
}

TEST(SyntheticTest, MeansAreDistinctAtFixedRadius) {
  const SyntheticTask task = MakeSyntheticTask(2, 10, 4, 5);
  for (std::uint64_t a = 0; a < 5; ++a) {
    double norm = 0;
    for (std::uint64_t j = 0; j < 4; ++j) norm += task.means[a * 4 + j] * task.means[a * 4 + j];
    EXPECT_NEAR(std::sqrt(norm), 3.0, 1e-12);
    for (std::uint64_t b = a + 1; b < 5; ++b) {
      double gap = 0;
      for (std::uint64_t j = 0; j < 4; ++j) {
        gap += std::abs(task.means[a * 4 + j] - task.means[b * 4 + j]);
      }
      EXPECT_GT(gap, 0.0);
    }
  }
}

TEST(SyntheticTest, NearestMeanClassifierIsInformative) {
  const std::uint64_t n = 5000, d = 16, c = 20;
  const SyntheticTask task = MakeSyntheticTask(7, n, d, c);
  std::uint64_t correct = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto x = task.data.embedding(i);
    std::uint64_t best = 0;
    double best_d = 1e300;
    for (std::uint64_t k = 0; k < c; ++k) {
      double dist = 0;
      for (std::uint64_t j = 0; j < d; ++j) dist += std::pow(x[j] - task.means[k * d + j], 2);
      if (dist < best_d) {
        best_d = dist;
        best = k;
      }
    }
    correct += best == task.data.label(i);
  }
  EXPECT_GT(static_cast<double>(correct) / n, 0.6);
}

}  // namespace
}  // namespace resmem
