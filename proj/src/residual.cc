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

#include "resmem/residual.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binary_io.h"
#include "resmem/error.h"
#include "resmem/parallel.h"
#include "resmem/softmax.h"

namespace resmem {
namespace {

constexpr char kMagic[] = "RRES";
constexpr std::uint32_t kVersion = 1;

}  // namespace

void HyperParams::Validate() const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kNonPositiveSigma, "sigma must be > 0");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::kNonPositiveTemperature, "temperature must be > 0");
  }
}

SparseResidualStore::SparseResidualStore(std::uint64_t n, std::uint64_t c, std::uint64_t m,
                                         float temperature, std::vector<std::uint32_t> classes,
                                         std::vector<float> values)
    : n_(n), c_(c), m_(m), temperature_(temperature),
      classes_(std::move(classes)), values_(std::move(values)) {
  if (m_ < 1 || m_ > c_) throw Error(ErrorCode::kShapeMismatch, "need 1 <= m <= c");
  if (classes_.size() != n_ * m_ || values_.size() != n_ * m_) {
    throw Error(ErrorCode::kShapeMismatch, "residual rows disagree with n*m");
  }
  if (!(temperature_ > 0.0f) || !std::isfinite(temperature_)) {
    throw Error(ErrorCode::kNonPositiveTemperature, "stored temperature must be > 0");
  }
  for (std::uint64_t i = 0; i < n_; ++i) {
    auto cls = row_classes(i);
    for (std::size_t j = 0; j < cls.size(); ++j) {
      if (cls[j] >= c_ || (j > 0 && cls[j] <= cls[j - 1])) {
        throw Error(ErrorCode::kShapeMismatch,
                    "row " + std::to_string(i) + " classes must be distinct, ascending and < c");
      }
    }
    for (float v : row_values(i)) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteValue, "non-finite residual");
    }
  }
}

std::vector<double> SparseResidualStore::Dense(std::uint64_t i) const {
  std::vector<double> out(c_, 0.0);
  AddScaledRow(i, 1.0, out);
  return out;
}

void SparseResidualStore::AddScaledRow(std::uint64_t i, double weight,
                                       std::span<double> out) const {
  auto cls = row_classes(i);
  auto val = row_values(i);
  for (std::size_t j = 0; j < cls.size(); ++j) out[cls[j]] += weight * static_cast<double>(val[j]);
}

std::vector<float> DenseResidual(std::span<const float> logits, std::uint32_t label,
                                 double temperature) {
  const std::vector<double> prob = Softmax(logits, temperature);
  // Rounding to f32 can land on +-1 when a probability is below float
  // resolution; keep entries strictly inside (-1, 1).
  constexpr float kBelowOne = 0x1.fffffep-1f;
  std::vector<float> r(prob.size());
  for (std::size_t j = 0; j < prob.size(); ++j) {
    const float v = static_cast<float>((j == label ? 1.0 : 0.0) - prob[j]);
    r[j] = std::clamp(v, -kBelowOne, kBelowOne);
  }
  return r;
}

std::vector<std::uint32_t> TopMagnitude(std::span<const float> values, std::uint64_t m) {
  std::vector<std::uint32_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0u);
  if (m < values.size()) {
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        const float ma = std::abs(values[a]);
                        const float mb = std::abs(values[b]);
                        return ma != mb ? ma > mb : a < b;
                      });
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

SparseResidualStore ComputeResiduals(const EmbeddingDataset& ds, double temperature,
                                     std::uint64_t m, int threads) {
  if (!ds.logits || !ds.labels) {
    throw Error(ErrorCode::kInvalidArgument, "residuals need logits and labels");
  }
  if (!(temperature > 0.0)) {
    throw Error(ErrorCode::kNonPositiveTemperature, "temperature must be > 0");
  }
  if (m == 0) m = ds.c;
  if (m > ds.c) throw Error(ErrorCode::kInvalidArgument, "m must be <= c");
  std::vector<std::uint32_t> classes(ds.n * m);
  std::vector<float> values(ds.n * m);
  ParallelFor(ds.n, threads, [&](std::size_t i) {
    const std::vector<float> dense = DenseResidual(ds.logit_row(i), ds.label(i), temperature);
    const std::vector<std::uint32_t> keep = TopMagnitude(dense, m);
    for (std::size_t j = 0; j < keep.size(); ++j) {
      classes[i * m + j] = keep[j];
      values[i * m + j] = dense[keep[j]];
    }
  });
  return SparseResidualStore(ds.n, ds.c, m, static_cast<float>(temperature), std::move(classes),
                             std::move(values));
}

std::vector<char> EncodeResidualStore(const SparseResidualStore& store) {
  internal::ByteWriter w;
  w.Magic(kMagic);
  w.Put<std::uint32_t>(kVersion);
  w.Put<std::uint64_t>(store.n());
  w.Put<std::uint64_t>(store.c());
  w.Put<std::uint64_t>(store.m());
  w.Put<float>(store.temperature());
  for (std::uint64_t i = 0; i < store.n(); ++i) {
    auto cls = store.row_classes(i);
    auto val = store.row_values(i);
    for (std::size_t j = 0; j < cls.size(); ++j) {
      w.Put<std::uint32_t>(cls[j]);
      w.Put<float>(val[j]);
    }
  }
  return w.bytes();
}

SparseResidualStore DecodeResidualStore(std::vector<char> bytes) {
  internal::ByteReader r(std::move(bytes));
  r.ExpectMagic(kMagic);
  const auto version = r.Get<std::uint32_t>();
  if (version != kVersion) {
    throw Error(ErrorCode::kVersionUnsupported, "RRES version " + std::to_string(version));
  }
  const auto n = r.Get<std::uint64_t>();
  const auto c = r.Get<std::uint64_t>();
  const auto m = r.Get<std::uint64_t>();
  const auto temperature = r.Get<float>();
  const std::uint64_t entries = internal::CheckedMul(n, m);
  if (entries > r.remaining() / 8) {
    throw Error(ErrorCode::kShapeMismatch, "declared sizes exceed file length");
  }
  std::vector<std::uint32_t> classes(entries);
  std::vector<float> values(entries);
  for (std::uint64_t e = 0; e < entries; ++e) {
    classes[e] = r.Get<std::uint32_t>();
    values[e] = r.Get<float>();
  }
  r.ExpectEnd();
  return SparseResidualStore(n, c, m, temperature, std::move(classes), std::move(values));
}

void SaveResidualStore(const SparseResidualStore& store, const std::string& path) {
  internal::WriteFileBytes(path, EncodeResidualStore(store));
}

SparseResidualStore LoadResidualStore(const std::string& path) {
  return DecodeResidualStore(internal::ReadFileBytes(path));
}

}  // namespace resmem
