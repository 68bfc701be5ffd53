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

#include "resmem/knn.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "binary_io.h"
#include "resmem/error.h"
#include "resmem/parallel.h"
#include "resmem/rng.h"

namespace resmem {
namespace {

constexpr char kMagic[] = "RIVF";
constexpr std::uint32_t kVersion = 1;

bool NeighborLess(const Neighbor& a, const Neighbor& b) {
  return a.distance != b.distance ? a.distance < b.distance : a.row < b.row;
}

void CheckMatrix(const std::vector<float>& z, std::uint64_t n, std::uint64_t d) {
  if (n == 0 || d == 0) throw Error(ErrorCode::kEmptyMatrix, "index needs n >= 1 and d >= 1");
  if (z.size() != n * d) throw Error(ErrorCode::kShapeMismatch, "embedding matrix is not n*d");
  for (float v : z) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteValue, "non-finite embedding");
  }
}

// Nearest centroid per row.
std::vector<std::uint32_t> Assign(const std::vector<float>& z, std::uint64_t n, std::uint64_t d,
                                  const std::vector<float>& centroids, int threads) {
  std::vector<std::uint32_t> assignment(n);
  ParallelFor(n, threads, [&](std::size_t i) {
    assignment[i] = static_cast<std::uint32_t>(
        NearestRow(centroids, d, {z.data() + i * d, static_cast<std::size_t>(d)}));
  });
  return assignment;
}

}  // namespace

double SquaredDistance(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += diff * diff;
  }
  return acc;
}

std::uint64_t NearestRow(std::span<const float> matrix, std::uint64_t d,
                         std::span<const float> query) {
  const std::uint64_t rows = matrix.size() / d;
  std::uint64_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::uint64_t j = 0; j < rows; ++j) {
    const double dist = SquaredDistance(matrix.subspan(j * d, d), query);
    if (dist < best_dist) {
      best_dist = dist;
      best = j;
    }
  }
  return best;
}

SoftKnnIndex SoftKnnIndex::BuildExact(std::vector<float> embeddings, std::uint64_t n,
                                      std::uint64_t d) {
  CheckMatrix(embeddings, n, d);
  SoftKnnIndex index;
  index.kind_ = Kind::kExact;
  index.n_ = n;
  index.d_ = d;
  index.embeddings_ = std::move(embeddings);
  return index;
}

SoftKnnIndex SoftKnnIndex::BuildIvf(std::vector<float> embeddings, std::uint64_t n,
                                    std::uint64_t d, std::uint64_t n_list, std::uint64_t iters,
                                    std::uint64_t seed, int threads) {
  CheckMatrix(embeddings, n, d);
  if (n_list < 1 || n_list > n) throw Error(ErrorCode::kInvalidArgument, "need 1 <= n_list <= n");
  const auto& z = embeddings;
  auto row = [&](std::uint64_t i) {
    return std::span<const float>(z.data() + i * d, static_cast<std::size_t>(d));
  };

  // Farthest-point seeding.
  std::vector<float> centroids;
  centroids.reserve(n_list * d);
  Rng rng(seed);
  std::uint64_t first = std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
  centroids.insert(centroids.end(), row(first).begin(), row(first).end());
  std::vector<double> min_dist(n);
  for (std::uint64_t i = 0; i < n; ++i) min_dist[i] = SquaredDistance(row(i), row(first));
  for (std::uint64_t c = 1; c < n_list; ++c) {
    const std::uint64_t next = static_cast<std::uint64_t>(
        std::max_element(min_dist.begin(), min_dist.end()) - min_dist.begin());
    centroids.insert(centroids.end(), row(next).begin(), row(next).end());
    for (std::uint64_t i = 0; i < n; ++i) {
      min_dist[i] = std::min(min_dist[i], SquaredDistance(row(i), row(next)));
    }
  }

  std::vector<std::uint32_t> assignment = Assign(z, n, d, centroids, threads);
  for (std::uint64_t it = 0; it < iters; ++it) {
    std::vector<double> sums(n_list * d, 0.0);
    std::vector<std::uint64_t> counts(n_list, 0);
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto a = assignment[i];
      ++counts[a];
      for (std::uint64_t k = 0; k < d; ++k) sums[a * d + k] += z[i * d + k];
    }
    std::vector<bool> taken(n, false);
    for (std::uint64_t c = 0; c < n_list; ++c) {
      if (counts[c] > 0) {
        for (std::uint64_t k = 0; k < d; ++k) {
          centroids[c * d + k] = static_cast<float>(sums[c * d + k] / static_cast<double>(counts[c]));
        }
        continue;
      }
      std::uint64_t far = 0;
      double far_dist = -1.0;
      for (std::uint64_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        const double dist = SquaredDistance(
            row(i), {centroids.data() + assignment[i] * d, static_cast<std::size_t>(d)});
        if (dist > far_dist) {
          far_dist = dist;
          far = i;
        }
      }
      taken[far] = true;
      std::copy(row(far).begin(), row(far).end(), centroids.begin() + c * d);
    }
    assignment = Assign(z, n, d, centroids, threads);
  }

  SoftKnnIndex index;
  index.kind_ = Kind::kInvertedFile;
  index.n_ = n;
  index.d_ = d;
  index.centroids_ = std::move(centroids);
  index.lists_.resize(n_list);
  for (std::uint64_t i = 0; i < n; ++i) {
    index.lists_[assignment[i]].push_back(static_cast<std::uint32_t>(i));
  }
  index.embeddings_ = std::move(embeddings);
  return index;
}

NeighborSet SoftKnnIndex::Candidates(std::span<const float> query, std::uint64_t n_probe) const {
  if (query.size() != d_) throw Error(ErrorCode::kShapeMismatch, "query dimension mismatch");
  NeighborSet out;
  if (kind_ == Kind::kExact) {
    out.resize(n_);
    for (std::uint64_t i = 0; i < n_; ++i) out[i] = {i, std::sqrt(SquaredDistance(row(i), query))};
    return out;
  }
  if (n_probe < 1 || n_probe > lists_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "need 1 <= n_probe <= n_list");
  }
  NeighborSet lists(lists_.size());
  for (std::uint64_t j = 0; j < lists_.size(); ++j) {
    lists[j] = {j, SquaredDistance(centroid(j), query)};
  }
  std::partial_sort(lists.begin(), lists.begin() + static_cast<std::ptrdiff_t>(n_probe),
                    lists.end(), NeighborLess);
  for (std::uint64_t p = 0; p < n_probe; ++p) {
    for (std::uint32_t i : lists_[lists[p].row]) {
      out.push_back({i, std::sqrt(SquaredDistance(row(i), query))});
    }
  }
  return out;
}

NeighborSet SoftKnnIndex::Query(std::span<const float> query, std::uint64_t k,
                                std::uint64_t n_probe) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  NeighborSet cand = Candidates(query, n_probe);
  const auto keep = static_cast<std::ptrdiff_t>(std::min<std::uint64_t>(k, cand.size()));
  std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(), NeighborLess);
  cand.resize(keep);
  return cand;
}

NeighborSet SoftKnnIndex::QueryWithTies(std::span<const float> query, std::uint64_t k,
                                        std::uint64_t n_probe) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  NeighborSet cand = Candidates(query, n_probe);
  if (k >= cand.size()) {
    std::sort(cand.begin(), cand.end(), NeighborLess);
    return cand;
  }
  std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1), cand.end(),
                   NeighborLess);
  const double kth = cand[k - 1].distance;
  auto tail = std::partition(cand.begin(), cand.end(),
                             [kth](const Neighbor& nb) { return nb.distance <= kth; });
  cand.erase(tail, cand.end());
  std::sort(cand.begin(), cand.end(), NeighborLess);
  return cand;
}

std::vector<char> SoftKnnIndex::Encode() const {
  internal::ByteWriter w;
  w.Magic(kMagic);
  w.Put<std::uint32_t>(kVersion);
  w.Put<std::uint64_t>(n_);
  w.Put<std::uint64_t>(d_);
  w.Put<std::uint64_t>(kind_ == Kind::kExact ? 0 : lists_.size());
  w.PutAll<float>(centroids_);
  for (const auto& list : lists_) w.Put<std::uint64_t>(list.size());
  for (const auto& list : lists_) w.PutAll<std::uint32_t>(list);
  return w.bytes();
}

SoftKnnIndex SoftKnnIndex::Decode(std::vector<char> bytes, std::vector<float> embeddings) {
  internal::ByteReader r(std::move(bytes));
  r.ExpectMagic(kMagic);
  const auto version = r.Get<std::uint32_t>();
  if (version != kVersion) {
    throw Error(ErrorCode::kVersionUnsupported, "RIVF version " + std::to_string(version));
  }
  const auto n = r.Get<std::uint64_t>();
  const auto d = r.Get<std::uint64_t>();
  const auto n_list = r.Get<std::uint64_t>();
  if (embeddings.size() != internal::CheckedMul(n, d)) {
    throw Error(ErrorCode::kShapeMismatch, "index was built for a different embedding matrix");
  }
  if (n_list == 0) {
    r.ExpectEnd();
    return BuildExact(std::move(embeddings), n, d);
  }
  if (n_list > n) throw Error(ErrorCode::kShapeMismatch, "n_list exceeds n");
  CheckMatrix(embeddings, n, d);
  SoftKnnIndex index;
  index.kind_ = Kind::kInvertedFile;
  index.n_ = n;
  index.d_ = d;
  index.centroids_ = r.GetAll<float>(internal::CheckedMul(n_list, d));
  for (float v : index.centroids_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteValue, "non-finite centroid");
  }
  const auto lengths = r.GetAll<std::uint64_t>(n_list);
  std::vector<bool> seen(n, false);
  std::uint64_t total = 0;
  index.lists_.resize(n_list);
  for (std::uint64_t j = 0; j < n_list; ++j) {
    index.lists_[j] = r.GetAll<std::uint32_t>(lengths[j]);
    for (std::uint32_t i : index.lists_[j]) {
      if (i >= n || seen[i]) {
        throw Error(ErrorCode::kShapeMismatch, "posting lists do not partition the rows");
      }
      seen[i] = true;
    }
    total += lengths[j];
  }
  if (total != n) throw Error(ErrorCode::kShapeMismatch, "posting lists do not cover every row");
  r.ExpectEnd();
  index.embeddings_ = std::move(embeddings);
  return index;
}

void SoftKnnIndex::Save(const std::string& path) const { internal::WriteFileBytes(path, Encode()); }

SoftKnnIndex SoftKnnIndex::Load(const std::string& path, std::vector<float> embeddings) {
  return Decode(internal::ReadFileBytes(path), std::move(embeddings));
}

std::vector<WeightedRow> SoftWeights(const NeighborSet& neighbors, double sigma, std::uint64_t k) {
  if (neighbors.empty()) throw Error(ErrorCode::kInvalidArgument, "no neighbors to weight");
  if (!(sigma > 0.0)) throw Error(ErrorCode::kNonPositiveSigma, "sigma must be > 0");
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");

  // w_i >= w_(k) is equivalent to dist_i <= dist_(k); compare distances so
  // exact ties survive underflow of the exponent.
  std::vector<double> dist;
  dist.reserve(neighbors.size());
  for (const auto& nb : neighbors) dist.push_back(nb.distance);
  std::vector<double> sorted = dist;
  std::sort(sorted.begin(), sorted.end());
  const double kth = sorted[std::min<std::uint64_t>(k, sorted.size()) - 1];
  const double nearest = sorted.front();

  std::vector<WeightedRow> out;
  double total = 0.0;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    if (dist[i] > kth) continue;
    // Shifting by the nearest distance cancels in the normalization.
    const double w = std::exp(-(dist[i] - nearest) / sigma);
    out.push_back({neighbors[i].row, w});
    total += w;
  }
  for (auto& wr : out) wr.weight /= total;
  return out;
}

std::vector<double> KnnResidual(const SoftKnnIndex& index, const SparseResidualStore& store,
                                std::span<const float> query, const HyperParams& hp,
                                std::uint64_t n_probe) {
  hp.Validate();
  if (store.n() != index.n()) {
    throw Error(ErrorCode::kShapeMismatch, "residual store and index disagree on row count");
  }
  const NeighborSet neighbors = index.QueryWithTies(query, hp.k, n_probe);
  std::vector<double> out(store.c(), 0.0);
  for (const WeightedRow& wr : SoftWeights(neighbors, hp.sigma, hp.k)) {
    store.AddScaledRow(wr.row, wr.weight, out);
  }
  return out;
}

}  // namespace resmem
