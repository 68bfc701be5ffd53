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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binary_io.h"
#include "resmem/error.h"
#include "resmem/rng.h"

namespace resmem {
namespace {

constexpr char kMagic[] = "RMEM";
constexpr std::uint32_t kKnownFlags = kFlagEmbeddings | kFlagLogits | kFlagLabels;

void CheckFinite(std::span<const float> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kNonFiniteValue,
                  std::string(what) + " entry " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace

void EmbeddingDataset::Validate() const {
  if (n < 1 || d < 1) throw Error(ErrorCode::kShapeMismatch, "need n >= 1 and d >= 1");
  if ((logits || labels) && c < 2) {
    throw Error(ErrorCode::kShapeMismatch, "need c >= 2 when logits or labels are present");
  }
  if (embeddings.size() != n * d) throw Error(ErrorCode::kShapeMismatch, "embeddings size != n*d");
  if (logits && logits->size() != n * c) throw Error(ErrorCode::kShapeMismatch, "logits size != n*c");
  if (labels && labels->size() != n) throw Error(ErrorCode::kShapeMismatch, "labels size != n");
  CheckFinite(embeddings, "embedding");
  if (logits) CheckFinite(*logits, "logit");
  if (labels) {
    for (std::uint64_t i = 0; i < n; ++i) {
      if ((*labels)[i] >= c) {
        throw Error(ErrorCode::kLabelOutOfRange,
                    "label " + std::to_string((*labels)[i]) + " at row " + std::to_string(i) +
                        " is not < c=" + std::to_string(c));
      }
    }
  }
}

EmbeddingDataset EmbeddingDataset::Subset(std::span<const std::uint64_t> rows) const {
  EmbeddingDataset out;
  out.n = rows.size();
  out.d = d;
  out.c = c;
  out.embeddings.reserve(rows.size() * d);
  for (auto r : rows) {
    auto e = embedding(r);
    out.embeddings.insert(out.embeddings.end(), e.begin(), e.end());
  }
  if (logits) {
    out.logits.emplace();
    out.logits->reserve(rows.size() * c);
    for (auto r : rows) {
      auto l = logit_row(r);
      out.logits->insert(out.logits->end(), l.begin(), l.end());
    }
  }
  if (labels) {
    out.labels.emplace();
    out.labels->reserve(rows.size());
    for (auto r : rows) out.labels->push_back((*labels)[r]);
  }
  return out;
}

std::vector<char> EncodeDataset(const EmbeddingDataset& ds) {
  internal::ByteWriter w;
  w.Magic(kMagic);
  w.Put<std::uint32_t>(kRmemVersion);
  std::uint32_t flags = kFlagEmbeddings;
  if (ds.logits) flags |= kFlagLogits;
  if (ds.labels) flags |= kFlagLabels;
  w.Put<std::uint32_t>(flags);
  w.Put<std::uint64_t>(ds.n);
  w.Put<std::uint64_t>(ds.d);
  w.Put<std::uint64_t>(ds.c);
  w.PutAll<float>(ds.embeddings);
  if (ds.logits) w.PutAll<float>(*ds.logits);
  if (ds.labels) w.PutAll<std::uint32_t>(*ds.labels);
  return w.bytes();
}

EmbeddingDataset DecodeDataset(std::vector<char> bytes) {
  internal::ByteReader r(std::move(bytes));
  r.ExpectMagic(kMagic);
  const auto version = r.Get<std::uint32_t>();
  if (version != kRmemVersion) {
    throw Error(ErrorCode::kVersionUnsupported, "RMEM version " + std::to_string(version));
  }
  const auto flags = r.Get<std::uint32_t>();
  if ((flags & ~kKnownFlags) != 0) {
    throw Error(ErrorCode::kVersionUnsupported, "unknown RMEM flag bits");
  }
  if ((flags & kFlagEmbeddings) == 0) {
    throw Error(ErrorCode::kShapeMismatch, "embeddings are required");
  }
  EmbeddingDataset ds;
  ds.n = r.Get<std::uint64_t>();
  ds.d = r.Get<std::uint64_t>();
  ds.c = r.Get<std::uint64_t>();
  ds.embeddings = r.GetAll<float>(internal::CheckedMul(ds.n, ds.d));
  if (flags & kFlagLogits) ds.logits = r.GetAll<float>(internal::CheckedMul(ds.n, ds.c));
  if (flags & kFlagLabels) ds.labels = r.GetAll<std::uint32_t>(ds.n);
  r.ExpectEnd();
  ds.Validate();
  return ds;
}

EmbeddingDataset LoadDataset(const std::string& path) {
  return DecodeDataset(internal::ReadFileBytes(path));
}

void SaveDataset(const EmbeddingDataset& ds, const std::string& path) {
  internal::WriteFileBytes(path, EncodeDataset(ds));
}

SplitIndices SplitRows(const EmbeddingDataset& ds, const SplitSpec& spec) {
  if (!ds.labels) throw Error(ErrorCode::kInvalidArgument, "split requires labels");
  double total = 0.0;
  for (double f : spec.fractions) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "split fractions must lie in [0, 1]");
    }
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "split fractions must sum to 1");
  }

  std::vector<std::vector<std::uint64_t>> by_class(ds.c);
  for (std::uint64_t i = 0; i < ds.n; ++i) by_class[ds.label(i)].push_back(i);

  Rng rng(spec.seed);
  SplitIndices out;
  std::size_t cursor = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto count = static_cast<double>(members.size());
    std::array<std::uint64_t, 3> take{};
    std::array<bool, 3> has_fraction{};
    std::uint64_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
      const double share = spec.fractions[s] * count;
      // Tolerance keeps e.g. 0.8*5 from flooring to 3 after rounding error.
      take[s] = static_cast<std::uint64_t>(std::floor(share + 1e-9));
      has_fraction[s] = share - static_cast<double>(take[s]) > 1e-9;
      assigned += take[s];
    }
    std::uint64_t remainder = members.size() - assigned;
    for (int step = 0; remainder > 0 && step < 6; ++step) {
      const std::size_t s = cursor % 3;
      cursor = (cursor + 1) % 3;
      if (has_fraction[s]) {
        ++take[s];
        has_fraction[s] = false;
        --remainder;
      }
    }
    // Only reachable when fractions are off by the 1e-9 sum tolerance.
    take[0] += remainder;

    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s) {
      out.rows[s].insert(out.rows[s].end(), members.begin() + pos, members.begin() + pos + take[s]);
      pos += take[s];
    }
  }
  for (int s = 0; s < 3; ++s) {
    std::sort(out.rows[s].begin(), out.rows[s].end());
    if (spec.fractions[s] > 0.0 && out.rows[s].empty()) {
      throw Error(ErrorCode::kEmptySplit,
                  "split " + std::to_string(s) + " has a positive fraction but no rows");
    }
  }
  return out;
}

DatasetSplits Split(const EmbeddingDataset& ds, const SplitSpec& spec) {
  auto idx = SplitRows(ds, spec);
  return {ds.Subset(idx.rows[0]), ds.Subset(idx.rows[1]), ds.Subset(idx.rows[2])};
}

}  // namespace resmem
