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

#include "resmem/datastore.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

#include "resmem/error.h"
#include "test_util.h"

namespace resmem {
namespace {

using testing::LeBytes;
using testing::TempDir;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

// Writes a random valid RMEM v1 file with the reference byte builder.
std::vector<char> RandomRmemFile(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(1, 12);
  const std::uint64_t n = size(rng), d = size(rng), c = 2 + size(rng) % 6;
  const bool has_logits = rng() % 2, has_labels = rng() % 2;
  std::normal_distribution<float> normal(0.0f, 10.0f);
  LeBytes b;
  b.Raw("RMEM").U32(1).U32(1 | (has_logits ? 2 : 0) | (has_labels ? 4 : 0)).U64(n).U64(d).U64(c);
  for (std::uint64_t i = 0; i < n * d; ++i) b.F32(normal(rng));
  if (has_logits) {
    for (std::uint64_t i = 0; i < n * c; ++i) b.F32(normal(rng));
  }
  if (has_labels) {
    for (std::uint64_t i = 0; i < n; ++i) b.U32(static_cast<std::uint32_t>(rng() % c));
  }
  return b.bytes();
}

EmbeddingDataset Tiny() {
  EmbeddingDataset ds;
  ds.n = 1;
  ds.d = 2;
  ds.c = 2;
  ds.embeddings = {0.0f, 0.0f};
  ds.logits = std::vector<float>{0.0f, 0.0f};
  ds.labels = std::vector<std::uint32_t>{0};
  return ds;
}

EmbeddingDataset Balanced(std::uint64_t n, std::uint64_t c) {
  EmbeddingDataset ds;
  ds.n = n;
  ds.d = 1;
  ds.c = c;
  ds.embeddings.resize(n);
  std::iota(ds.embeddings.begin(), ds.embeddings.end(), 0.0f);
  ds.labels.emplace(n);
  for (std::uint64_t i = 0; i < n; ++i) (*ds.labels)[i] = static_cast<std::uint32_t>(i % c);
  return ds;
}

TEST(DatastoreTest, LoadsHandWrittenTinyFile) {
  TempDir dir;
  LeBytes b;
  b.Raw("RMEM").U32(1).U32(7).U64(1).U64(2).U64(2).F32(0).F32(0).F32(0).F32(0).U32(0);
  testing::WriteBytes(dir.File("tiny.rmem"), b.bytes());
  EXPECT_EQ(LoadDataset(dir.File("tiny.rmem")), Tiny());
}

TEST(DatastoreTest, SaveThenLoadReturnsEqualDataset) {
  TempDir dir;
  SaveDataset(Tiny(), dir.File("a.rmem"));
  EXPECT_EQ(LoadDataset(dir.File("a.rmem")), Tiny());
}

TEST(DatastoreTest, FlagsEncodeAbsentLogits) {
  EmbeddingDataset ds = Tiny();
  ds.logits.reset();
  const std::vector<char> bytes = EncodeDataset(ds);
  std::uint32_t flags = 0;
  std::memcpy(&flags, bytes.data() + 8, 4);
  EXPECT_EQ(flags, kFlagEmbeddings | kFlagLabels);
  EXPECT_EQ(bytes.size(), 4 + 4 + 4 + 24 + 2 * 4 + 4u);
}

TEST(DatastoreTest, TruncatedFileIsShapeMismatch) {
  std::vector<char> bytes = EncodeDataset(Tiny());
  bytes.resize(bytes.size() - 6);
  EXPECT_EQ(CodeOf([&] { DecodeDataset(bytes); }), ErrorCode::kShapeMismatch);
}

TEST(DatastoreTest, TrailingBytesAreShapeMismatch) {
  std::vector<char> bytes = EncodeDataset(Tiny());
  bytes.push_back(0);
  EXPECT_EQ(CodeOf([&] { DecodeDataset(bytes); }), ErrorCode::kShapeMismatch);
}

TEST(DatastoreTest, HugeDeclaredSizesAreShapeMismatch) {
  LeBytes b;
  b.Raw("RMEM").U32(1).U32(1).U64(1ull << 40).U64(1ull << 40).U64(2);
  EXPECT_EQ(CodeOf([&] { DecodeDataset(b.bytes()); }), ErrorCode::kShapeMismatch);
}

TEST(DatastoreTest, RejectsBadHeaders) {
  std::vector<char> bytes = EncodeDataset(Tiny());
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(CodeOf([&] { DecodeDataset(bad_magic); }), ErrorCode::kBadMagic);
  auto bad_version = bytes;
  bad_version[4] = 2;
  EXPECT_EQ(CodeOf([&] { DecodeDataset(bad_version); }), ErrorCode::kVersionUnsupported);
  auto unknown_flag = bytes;
  unknown_flag[8] |= 0x10;
  EXPECT_EQ(CodeOf([&] { DecodeDataset(unknown_flag); }), ErrorCode::kVersionUnsupported);
}

TEST(DatastoreTest, RejectsNonFiniteValues) {
  for (float bad : {std::numeric_limits<float>::quiet_NaN(), std::numeric_limits<float>::infinity(),
                    -std::numeric_limits<float>::infinity()}) {
    EmbeddingDataset ds = Tiny();
    ds.embeddings[1] = bad;
    EXPECT_EQ(CodeOf([&] { DecodeDataset(EncodeDataset(ds)); }), ErrorCode::kNonFiniteValue);
    ds = Tiny();
    (*ds.logits)[0] = bad;
    EXPECT_EQ(CodeOf([&] { DecodeDataset(EncodeDataset(ds)); }), ErrorCode::kNonFiniteValue);
  }
}

TEST(DatastoreTest, RejectsLabelOutOfRange) {
  EmbeddingDataset ds = Tiny();
  (*ds.labels)[0] = 2;
  EXPECT_EQ(CodeOf([&] { DecodeDataset(EncodeDataset(ds)); }), ErrorCode::kLabelOutOfRange);
}

TEST(DatastoreTest, MissingFileIsIoError) {
  EXPECT_EQ(CodeOf([] { LoadDataset("/nonexistent/dir/file.rmem"); }), ErrorCode::kIoError);
}

TEST(DatastoreTest, RandomFilesRoundTripByteExact) {
  TempDir dir;
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<char> original = RandomRmemFile(rng);
    testing::WriteBytes(dir.File("in.rmem"), original);
    const EmbeddingDataset ds = LoadDataset(dir.File("in.rmem"));
    SaveDataset(ds, dir.File("out.rmem"));
    ASSERT_EQ(testing::ReadBytes(dir.File("out.rmem")), original) << "trial " << trial;
    EXPECT_EQ(LoadDataset(dir.File("out.rmem")), ds);
  }
}

TEST(SplitTest, AllTrainReturnsDataset) {
  const EmbeddingDataset ds = Balanced(13, 3);
  const DatasetSplits s = Split(ds, {{1.0, 0.0, 0.0}, 5});
  EXPECT_EQ(s.train, ds);
  EXPECT_EQ(s.val.n, 0u);
  EXPECT_EQ(s.test.n, 0u);
}

TEST(SplitTest, TenBalancedRowsSplitEightOneOne) {
  const SplitIndices idx = SplitRows(Balanced(10, 2), {{0.8, 0.1, 0.1}, 3});
  EXPECT_EQ(idx.rows[0].size(), 8u);
  EXPECT_EQ(idx.rows[1].size(), 1u);
  EXPECT_EQ(idx.rows[2].size(), 1u);
}

TEST(SplitTest, SameSeedSameIndices) {
  const EmbeddingDataset ds = Balanced(101, 4);
  const SplitSpec spec{{0.6, 0.2, 0.2}, 99};
  const SplitIndices a = SplitRows(ds, spec);
  const SplitIndices b = SplitRows(ds, spec);
  EXPECT_EQ(a.rows, b.rows);
  const SplitIndices c = SplitRows(ds, {{0.6, 0.2, 0.2}, 100});
  EXPECT_NE(a.rows, c.rows);
}

TEST(SplitTest, StratifiedAllocationPerClass) {
  const EmbeddingDataset ds = Balanced(2000, 20);
  const SplitIndices idx = SplitRows(ds, {{0.6, 0.2, 0.2}, 1});
  for (int s = 0; s < 3; ++s) {
    std::vector<int> per_class(20, 0);
    for (auto r : idx.rows[s]) ++per_class[ds.label(r)];
    for (int count : per_class) EXPECT_EQ(count, s == 0 ? 60 : 20);
  }
}

TEST(SplitTest, SplitsPartitionRowsForRandomSpecs) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint64_t c = 2 + rng() % 5;
    EmbeddingDataset ds = Balanced(1 + rng() % 80, c);
    for (auto& y : *ds.labels) y = static_cast<std::uint32_t>(rng() % c);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const SplitSpec spec{{a, b - a, 1.0 - b}, rng()};
    SplitIndices idx;
    try {
      idx = SplitRows(ds, spec);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::kEmptySplit);
      continue;
    }
    std::vector<int> seen(ds.n, 0);
    for (const auto& rows : idx.rows) {
      EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end()));
      for (auto r : rows) ++seen[r];
    }
    for (int s : seen) ASSERT_EQ(s, 1) << "trial " << trial;
  }
}

TEST(SplitTest, EmptyRequiredSplitIsAnError) {
  EXPECT_EQ(CodeOf([] { SplitRows(Balanced(4, 2), {{1.0 - 1e-12, 1e-12, 0.0}, 1}); }),
            ErrorCode::kEmptySplit);
}

TEST(SplitTest, RejectsBadFractionsAndUnlabeledData) {
  EXPECT_EQ(CodeOf([] { SplitRows(Balanced(10, 2), {{0.5, 0.2, 0.2}, 1}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { SplitRows(Balanced(10, 2), {{1.2, -0.2, 0.0}, 1}); }),
            ErrorCode::kInvalidArgument);
  EmbeddingDataset ds = Balanced(10, 2);
  ds.labels.reset();
  EXPECT_EQ(CodeOf([&] { SplitRows(ds, {{1.0, 0.0, 0.0}, 1}); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace resmem
