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

#ifndef RESMEM_SOFTMAX_H_
#define RESMEM_SOFTMAX_H_

#include <cstdint>
#include <span>
#include <vector>

namespace resmem {

// softmax(logits / temperature), max-shifted. Throws NonPositiveTemperature.
std::vector<double> Softmax(std::span<const double> logits, double temperature);
std::vector<double> Softmax(std::span<const float> logits, double temperature);

// log softmax(logits)_index at temperature 1.
double LogSoftmaxAt(std::span<const double> logits, std::uint32_t index);

// First index of the maximum entry.
std::uint32_t ArgMax(std::span<const double> values);

}  // namespace resmem

#endif  // RESMEM_SOFTMAX_H_
