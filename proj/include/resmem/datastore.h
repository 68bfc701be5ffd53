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

#ifndef RESMEM_DATASTORE_H_
#define RESMEM_DATASTORE_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace resmem {

// n rows of (embedding, logits, label). The embedding slot doubles as the raw
// feature vector when a base model is trained from scratch. Row-major f32.
struct EmbeddingDataset {
  std::uint64_t n = 0;
  std::uint64_t d = 0;
  std::uint64_t c = 0;
  std::vector<float> embeddings;                     // n * d
  std::optional<std::vector<float>> logits;          // n * c
  std::optional<std::vector<std::uint32_t>> labels;  // n

  std::span<const float> embedding(std::uint64_t row) const {
    return {embeddings.data() + row * d, static_cast<std::size_t>(d)};
  }
  std::span<const float> logit_row(std::uint64_t row) const {
    return {logits->data() + row * c, static_cast<std::size_t>(c)};
  }
  std::uint32_t label(std::uint64_t row) const { return (*labels)[row]; }

  // Throws ShapeMismatch / NonFiniteValue / LabelOutOfRange.
  void Validate() const;

  // Rows in the given order; index values must be < n.
  EmbeddingDataset Subset(std::span<const std::uint64_t> rows) const;

  bool operator==(const EmbeddingDataset&) const = default;
};

inline constexpr std::uint32_t kRmemVersion = 1;
inline constexpr std::uint32_t kFlagEmbeddings = 1u << 0;
inline constexpr std::uint32_t kFlagLogits = 1u << 1;
inline constexpr std::uint32_t kFlagLabels = 1u << 2;

EmbeddingDataset LoadDataset(const std::string& path);
EmbeddingDataset DecodeDataset(std::vector<char> bytes);
void SaveDataset(const EmbeddingDataset& ds, const std::string& path);
std::vector<char> EncodeDataset(const EmbeddingDataset& ds);

struct SplitSpec {
  std::array<double, 3> fractions = {1.0, 0.0, 0.0};  // train, val, test
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::array<std::vector<std::uint64_t>, 3> rows;  // each ascending
};

// Stratified, seeded split. Per class: floor(fraction * count) to each part,
// then the remainder one unit at a time to parts with a nonzero fractional
// share, cycling train -> val -> test with a cursor that carries over from
// class to class (classes in ascending label order).
SplitIndices SplitRows(const EmbeddingDataset& ds, const SplitSpec& spec);

struct DatasetSplits {
  EmbeddingDataset train;
  EmbeddingDataset val;
  EmbeddingDataset test;
};

DatasetSplits Split(const EmbeddingDataset& ds, const SplitSpec& spec);

}  // namespace resmem

#endif  // RESMEM_DATASTORE_H_
