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

#include "resmem/model.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "resmem/error.h"
#include "test_util.h"

namespace resmem {
namespace {

// Reference evaluation with explicit per-unit sums, no shared code with
// RunForward.
Forward NaiveForward(const MlpParams& p, const std::vector<float>& x) {
  Forward f;
  for (std::size_t j = 0; j < p.hidden; ++j) {
    double z = p.b1[j];
    for (std::size_t i = 0; i < p.d_in; ++i) z += p.w1[i * p.hidden + j] * static_cast<double>(x[i]);
    f.hidden.push_back(std::max(z, 0.0));
  }
  for (std::size_t k = 0; k < p.classes; ++k) {
    double z = p.b2[k];
    for (std::size_t j = 0; j < p.hidden; ++j) z += p.w2[j * p.classes + k] * f.hidden[j];
    f.logits.push_back(z);
  }
  return f;
}

// Two Gaussian blobs separated along the first axis.
EmbeddingDataset SeparableBlobs(std::uint64_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> noise(0.0f, 0.5f);
  EmbeddingDataset ds;
  ds.n = n;
  ds.d = 2;
  ds.c = 2;
  ds.labels.emplace();
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint32_t y = i % 2;
    ds.embeddings.push_back((y ? 3.0f : -3.0f) + noise(rng));
    ds.embeddings.push_back(noise(rng));
    ds.labels->push_back(y);
  }
  return ds;
}

TEST(InitMlpTest, BiasesZeroAndWeightsBounded) {
  const MlpParams p = InitMlp(5, 7, 3, 42);
  EXPECT_TRUE(std::all_of(p.b1.begin(), p.b1.end(), [](double v) { return v == 0.0; }));
  EXPECT_TRUE(std::all_of(p.b2.begin(), p.b2.end(), [](double v) { return v == 0.0; }));
  const double bound1 = std::sqrt(6.0 / (5 + 7));
  const double bound2 = std::sqrt(6.0 / (7 + 3));
  for (double v : p.w1) EXPECT_LE(std::abs(v), bound1);
  for (double v : p.w2) EXPECT_LE(std::abs(v), bound2);
  EXPECT_EQ(p.w1.size(), 35u);
  EXPECT_EQ(p.w2.size(), 21u);
}

TEST(InitMlpTest, DeterministicGivenSeed) {
  EXPECT_EQ(InitMlp(4, 6, 3, 9), InitMlp(4, 6, 3, 9));
  EXPECT_NE(InitMlp(4, 6, 3, 9), InitMlp(4, 6, 3, 10));
}

TEST(InitMlpTest, RejectsDegenerateShapes) {
  EXPECT_THROW(InitMlp(0, 4, 2, 1), Error);
  EXPECT_THROW(InitMlp(3, 4, 1, 1), Error);
}

TEST(ForwardTest, ZeroParamsGiveZeros) {
  const MlpParams p = MlpParams::Zeros(3, 4, 2);
  const Forward f = RunForward(p, std::vector<float>{1.0f, -2.0f, 3.0f});
  EXPECT_EQ(f.hidden, std::vector<double>(4, 0.0));
  EXPECT_EQ(f.logits, std::vector<double>(2, 0.0));
}

TEST(ForwardTest, IdentityLayerPassesNonNegativeInput) {
  MlpParams p = MlpParams::Zeros(3, 5, 2);
  for (std::size_t i = 0; i < 3; ++i) p.w1[i * 5 + i] = 1.0;
  const Forward f = RunForward(p, std::vector<float>{0.5f, 0.0f, 2.0f});
  EXPECT_EQ(f.hidden, (std::vector<double>{0.5, 0.0, 2.0, 0.0, 0.0}));
}

TEST(ForwardTest, MatchesNaiveLoops) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    MlpParams p = InitMlp(6, 9, 4, rng());
    std::normal_distribution<double> normal;
    for (double& b : p.b1) b = normal(rng);
    for (double& b : p.b2) b = normal(rng);
    const std::vector<float> x = testing::RandomMatrix(1, 6, rng);
    const Forward got = RunForward(p, x);
    const Forward want = NaiveForward(p, x);
    for (std::size_t j = 0; j < 9; ++j) EXPECT_NEAR(got.hidden[j], want.hidden[j], 1e-12);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(got.logits[k], want.logits[k], 1e-12);
  }
}

TEST(ForwardTest, RejectsWrongInputWidth) {
  EXPECT_THROW(RunForward(InitMlp(3, 2, 2, 0), std::vector<float>{1.0f}), Error);
}

TEST(LossTest, EqualLogitsGiveLogTwo) {
  const MlpParams p = MlpParams::Zeros(2, 3, 2);
  const std::vector<float> x = {1.0f, 2.0f};
  const std::vector<Sample> batch = {{x, 0}, {x, 1}};
  EXPECT_NEAR(ComputeLossAndGrad(p, batch).loss, std::log(2.0), 1e-15);
}

TEST(LossTest, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    MlpParams p = InitMlp(4, 6, 3, rng());
    std::normal_distribution<double> normal(0.0, 0.3);
    for (double& b : p.b1) b = normal(rng);
    const std::vector<float> xs = testing::RandomMatrix(5, 4, rng);
    std::vector<Sample> batch;
    for (std::size_t i = 0; i < 5; ++i) {
      batch.push_back({std::span<const float>(xs).subspan(i * 4, 4),
                       static_cast<std::uint32_t>(rng() % 3)});
    }
    const LossAndGrad analytic = ComputeLossAndGrad(p, batch);
    constexpr double kStep = 1e-5;
    double max_rel = 0.0;
    auto blocks = p.Blocks();
    auto grads = std::as_const(analytic.grad).Blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (std::size_t i = 0; i < blocks[b].size(); ++i) {
        const double saved = blocks[b][i];
        blocks[b][i] = saved + kStep;
        const double up = ComputeLossAndGrad(p, batch).loss;
        blocks[b][i] = saved - kStep;
        const double down = ComputeLossAndGrad(p, batch).loss;
        blocks[b][i] = saved;
        const double numeric = (up - down) / (2 * kStep);
        const double denom = std::max({std::abs(numeric), std::abs(grads[b][i]), 1e-7});
        max_rel = std::max(max_rel, std::abs(numeric - grads[b][i]) / denom);
      }
    }
    EXPECT_LT(max_rel, 1e-4) << "trial " << trial;
  }
}

TEST(LossTest, DuplicatedOrPermutedBatchLeavesLossAndGradUnchanged) {
  std::mt19937_64 rng(5);
  const MlpParams p = InitMlp(3, 4, 3, 1);
  const std::vector<float> xs = testing::RandomMatrix(4, 3, rng);
  std::vector<Sample> batch;
  for (std::size_t i = 0; i < 4; ++i) {
    batch.push_back({std::span<const float>(xs).subspan(i * 3, 3), static_cast<std::uint32_t>(i % 3)});
  }
  const LossAndGrad base = ComputeLossAndGrad(p, batch);
  std::vector<Sample> doubled = batch;
  doubled.insert(doubled.end(), batch.begin(), batch.end());
  std::vector<Sample> reversed(batch.rbegin(), batch.rend());
  for (const auto& other : {doubled, reversed}) {
    const LossAndGrad lg = ComputeLossAndGrad(p, other);
    EXPECT_NEAR(lg.loss, base.loss, 1e-14);
    auto a = std::as_const(lg.grad).Blocks();
    auto b = std::as_const(base.grad).Blocks();
    for (std::size_t k = 0; k < a.size(); ++k) {
      for (std::size_t i = 0; i < a[k].size(); ++i) EXPECT_NEAR(a[k][i], b[k][i], 1e-14);
    }
  }
}

TEST(TrainSgdTest, ZeroEpochsIsIdentity) {
  const EmbeddingDataset ds = SeparableBlobs(20, 1);
  const MlpParams init = InitMlp(2, 4, 2, 3);
  const TrainResult r = TrainSgd(init, ds, {0, 8, 0.1, 0.9, 1});
  EXPECT_EQ(r.params, init);
  EXPECT_TRUE(r.loss_trace.empty());
}

TEST(TrainSgdTest, LearnsSeparableBlobs) {
  const EmbeddingDataset ds = SeparableBlobs(200, 2);
  const TrainResult r = TrainSgd(InitMlp(2, 8, 2, 4), ds, {50, 16, 0.1, 0.0, 5});
  EXPECT_GT(Accuracy(r.params, ds), 0.95);
  EXPECT_EQ(r.loss_trace.size(), 50u);
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front());
}

TEST(TrainSgdTest, BitDeterministic) {
  const EmbeddingDataset ds = SeparableBlobs(64, 3);
  const TrainConfig cfg{7, 10, 0.05, 0.9, 17};
  const TrainResult a = TrainSgd(InitMlp(2, 5, 2, 8), ds, cfg);
  const TrainResult b = TrainSgd(InitMlp(2, 5, 2, 8), ds, cfg);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
}

TEST(TrainSgdTest, DivergenceReportsNonFiniteLoss) {
  const EmbeddingDataset ds = SeparableBlobs(32, 4);
  try {
    TrainSgd(InitMlp(2, 4, 2, 1), ds, {200, 4, 1e200, 0.0, 1});
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteLoss);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(TrainSgdTest, RejectsMismatchedFeatures) {
  const EmbeddingDataset ds = SeparableBlobs(8, 4);
  EXPECT_THROW(TrainSgd(InitMlp(3, 4, 2, 1), ds, {}), Error);
}

TEST(EmbedTest, CarriesHiddenActivationsAndLogits) {
  const EmbeddingDataset ds = SeparableBlobs(10, 6);
  const MlpParams p = InitMlp(2, 3, 2, 2);
  const EmbeddingDataset e = Embed(p, ds, 4);
  EXPECT_EQ(e.d, 3u);
  EXPECT_EQ(e.labels, ds.labels);
  for (std::uint64_t i = 0; i < ds.n; ++i) {
    const Forward f = RunForward(p, ds.embedding(i));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(e.embedding(i)[j], static_cast<float>(f.hidden[j]));
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(e.logit_row(i)[k], static_cast<float>(f.logits[k]));
  }
  EXPECT_EQ(Embed(p, ds, 1), e);
}

TEST(CheckpointTest, RoundTripsAndRejectsCorruption) {
  testing::TempDir dir;
  const MlpParams p = InitMlp(3, 4, 5, 77);
  SaveMlp(p, dir.File("m.rmlp"));
  EXPECT_EQ(LoadMlp(dir.File("m.rmlp")), p);
  std::vector<char> bytes = EncodeMlp(p);
  EXPECT_EQ(bytes.size(), 4 + 4 + 24 + 8 * p.ParameterCount());
  bytes[1] = 'X';
  EXPECT_THROW(DecodeMlp(bytes), Error);
  bytes = EncodeMlp(p);
  bytes.pop_back();
  EXPECT_THROW(DecodeMlp(bytes), Error);
}

}  // namespace
}  // namespace resmem
