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

#ifndef RESMEM_KNN_H_
#define RESMEM_KNN_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "resmem/residual.h"

namespace resmem {

struct Neighbor {
  std::uint64_t row = 0;
  double distance = 0.0;  // L2, not squared

  bool operator==(const Neighbor&) const = default;
};

// Ascending by distance, ties by lower row.
using NeighborSet = std::vector<Neighbor>;

struct WeightedRow {
  std::uint64_t row = 0;
  double weight = 0.0;
};

// Squared L2 distance, accumulated in f64.
double SquaredDistance(std::span<const float> a, std::span<const float> b);

// Top-k L2 search over an n x d embedding matrix, either by full scan or via
// an inverted file of k-means posting lists. Immutable after build.
class SoftKnnIndex {
 public:
  enum class Kind { kExact, kInvertedFile };

  static SoftKnnIndex BuildExact(std::vector<float> embeddings, std::uint64_t n, std::uint64_t d);

  // Farthest-point seeding from a seeded random first row, then `iters` Lloyd
  // iterations. Empty clusters are re-seeded with the row farthest from its
  // assigned centroid.
  static SoftKnnIndex BuildIvf(std::vector<float> embeddings, std::uint64_t n, std::uint64_t d,
                               std::uint64_t n_list, std::uint64_t iters, std::uint64_t seed,
                               int threads = 1);

  Kind kind() const { return kind_; }
  std::uint64_t n() const { return n_; }
  std::uint64_t d() const { return d_; }
  std::uint64_t n_list() const { return lists_.size(); }
  std::span<const float> row(std::uint64_t i) const {
    return {embeddings_.data() + i * d_, static_cast<std::size_t>(d_)};
  }
  std::span<const float> centroid(std::uint64_t j) const {
    return {centroids_.data() + j * d_, static_cast<std::size_t>(d_)};
  }
  const std::vector<std::vector<std::uint32_t>>& lists() const { return lists_; }

  // The min(k, candidates) nearest rows. n_probe is ignored for exact indexes.
  NeighborSet Query(std::span<const float> query, std::uint64_t k, std::uint64_t n_probe = 1) const;

  // Like Query, but also returns every further candidate tied with the k-th
  // distance.
  NeighborSet QueryWithTies(std::span<const float> query, std::uint64_t k,
                            std::uint64_t n_probe = 1) const;

  // Serialized as RIVF; an exact index is written with n_list = 0. The
  // embedding matrix itself is not part of the file.
  std::vector<char> Encode() const;
  static SoftKnnIndex Decode(std::vector<char> bytes, std::vector<float> embeddings);
  void Save(const std::string& path) const;
  static SoftKnnIndex Load(const std::string& path, std::vector<float> embeddings);

 private:
  NeighborSet Candidates(std::span<const float> query, std::uint64_t n_probe) const;

  Kind kind_ = Kind::kExact;
  std::uint64_t n_ = 0;
  std::uint64_t d_ = 0;
  std::vector<float> embeddings_;
  std::vector<float> centroids_;
  std::vector<std::vector<std::uint32_t>> lists_;
};

// Index of the nearest centroid/row in an m x d matrix, ties to the lowest.
std::uint64_t NearestRow(std::span<const float> matrix, std::uint64_t d,
                         std::span<const float> query);

// Kernel weights exp(-dist / sigma) restricted to entries at least as large
// as the k-th largest weight, normalized to sum to one.
std::vector<WeightedRow> SoftWeights(const NeighborSet& neighbors, double sigma, std::uint64_t k);

// Soft kNN regression of the stored residual rows at the query embedding.
std::vector<double> KnnResidual(const SoftKnnIndex& index, const SparseResidualStore& store,
                                std::span<const float> query, const HyperParams& hp,
                                std::uint64_t n_probe = 1);

}  // namespace resmem

#endif  // RESMEM_KNN_H_
