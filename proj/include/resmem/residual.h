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

#ifndef RESMEM_RESIDUAL_H_
#define RESMEM_RESIDUAL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "resmem/datastore.h"

namespace resmem {

// Neighbor count, kernel width and softmax temperature.
struct HyperParams {
  std::uint64_t k = 1;
  double sigma = 1.0;
  double temperature = 1.0;

  // Throws InvalidArgument (k), NonPositiveSigma, NonPositiveTemperature.
  void Validate() const;
};

// Per-example residuals onehot(y) - softmax(logits / T), keeping the m
// largest-magnitude entries per row (ties to the lower class). Rows are stored
// sorted by class index; missing classes read as zero.
class SparseResidualStore {
 public:
  SparseResidualStore() = default;
  SparseResidualStore(std::uint64_t n, std::uint64_t c, std::uint64_t m, float temperature,
                      std::vector<std::uint32_t> classes, std::vector<float> values);

  std::uint64_t n() const { return n_; }
  std::uint64_t c() const { return c_; }
  std::uint64_t m() const { return m_; }
  float temperature() const { return temperature_; }
  bool dense() const { return m_ == c_; }

  std::span<const std::uint32_t> row_classes(std::uint64_t i) const {
    return {classes_.data() + i * m_, static_cast<std::size_t>(m_)};
  }
  std::span<const float> row_values(std::uint64_t i) const {
    return {values_.data() + i * m_, static_cast<std::size_t>(m_)};
  }

  // Zero-filled dense row.
  std::vector<double> Dense(std::uint64_t i) const;

  // out += weight * row i
  void AddScaledRow(std::uint64_t i, double weight, std::span<double> out) const;

  bool operator==(const SparseResidualStore&) const = default;

 private:
  std::uint64_t n_ = 0;
  std::uint64_t c_ = 0;
  std::uint64_t m_ = 0;
  float temperature_ = 1.0f;
  std::vector<std::uint32_t> classes_;
  std::vector<float> values_;
};

// Dense residual for a single example, in f32 as stored.
std::vector<float> DenseResidual(std::span<const float> logits, std::uint32_t label,
                                 double temperature);

// Indices of the m largest |value| entries (ties to the lower index), sorted
// ascending.
std::vector<std::uint32_t> TopMagnitude(std::span<const float> values, std::uint64_t m);

// m == 0 selects the dense default (m = c).
SparseResidualStore ComputeResiduals(const EmbeddingDataset& ds, double temperature,
                                     std::uint64_t m = 0, int threads = 1);

std::vector<char> EncodeResidualStore(const SparseResidualStore& store);
SparseResidualStore DecodeResidualStore(std::vector<char> bytes);
void SaveResidualStore(const SparseResidualStore& store, const std::string& path);
SparseResidualStore LoadResidualStore(const std::string& path);

}  // namespace resmem

#endif  // RESMEM_RESIDUAL_H_
