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

#include "resmem/synthetic.h"

#include <cmath>

#include "resmem/error.h"
#include "resmem/rng.h"

namespace resmem {

SyntheticTask MakeSyntheticTask(std::uint64_t seed, std::uint64_t n, std::uint64_t d,
                                std::uint64_t c) {
  if (c < 2) throw Error(ErrorCode::kInvalidArgument, "need c >= 2");
  if (n < 1 || d < 1) throw Error(ErrorCode::kInvalidArgument, "need n, d >= 1");
  constexpr double kRadius = 3.0;
  Rng rng(seed);
  std::normal_distribution<double> normal;

  SyntheticTask task;
  task.means.resize(c * d);
  for (std::uint64_t k = 0; k < c; ++k) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (std::uint64_t j = 0; j < d; ++j) {
        task.means[k * d + j] = normal(rng);
        norm += task.means[k * d + j] * task.means[k * d + j];
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (std::uint64_t j = 0; j < d; ++j) task.means[k * d + j] *= kRadius / norm;
  }

  EmbeddingDataset& ds = task.data;
  ds.n = n;
  ds.d = d;
  ds.c = c;
  ds.embeddings.resize(n * d);
  ds.labels.emplace(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::uint32_t>(i % c);
    (*ds.labels)[i] = y;
    for (std::uint64_t j = 0; j < d; ++j) {
      ds.embeddings[i * d + j] = static_cast<float>(task.means[y * d + j] + normal(rng));
    }
  }
  return task;
}

}  // namespace resmem
