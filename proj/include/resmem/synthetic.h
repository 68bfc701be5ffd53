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

#ifndef RESMEM_SYNTHETIC_H_
#define RESMEM_SYNTHETIC_H_

#include <cstdint>
#include <vector>

#include "resmem/datastore.h"

namespace resmem {

struct SyntheticTask {
  EmbeddingDataset data;    // raw features in the embedding slot, labels, no logits
  std::vector<double> means;  // c x d class means
};

// Gaussian mixture: c means uniform on the sphere of radius 3 in R^d,
// isotropic unit-variance noise, row i labeled i mod c.
SyntheticTask MakeSyntheticTask(std::uint64_t seed, std::uint64_t n, std::uint64_t d,
                                std::uint64_t c);

inline EmbeddingDataset DemoSynthetic(std::uint64_t seed, std::uint64_t n, std::uint64_t d,
                                      std::uint64_t c) {
  return MakeSyntheticTask(seed, n, d, c).data;
}

}  // namespace resmem

#endif  // RESMEM_SYNTHETIC_H_
