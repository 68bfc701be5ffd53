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

#include "resmem/softmax.h"

#include <algorithm>
#include <cmath>

#include "resmem/error.h"

namespace resmem {
namespace {

template <typename T>
std::vector<double> SoftmaxImpl(std::span<const T> logits, double temperature) {
  if (!(temperature > 0.0)) {
    throw Error(ErrorCode::kNonPositiveTemperature, "temperature must be > 0");
  }
  if (logits.empty()) throw Error(ErrorCode::kInvalidArgument, "softmax of empty vector");
  double max_logit = logits[0];
  for (T v : logits) max_logit = std::max<double>(max_logit, v);
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = std::exp((static_cast<double>(logits[j]) - max_logit) / temperature);
    sum += out[j];
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace

std::vector<double> Softmax(std::span<const double> logits, double temperature) {
  return SoftmaxImpl(logits, temperature);
}

std::vector<double> Softmax(std::span<const float> logits, double temperature) {
  return SoftmaxImpl(logits, temperature);
}

double LogSoftmaxAt(std::span<const double> logits, std::uint32_t index) {
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - max_logit);
  return logits[index] - max_logit - std::log(sum);
}

std::uint32_t ArgMax(std::span<const double> values) {
  std::uint32_t best = 0;
  for (std::uint32_t j = 1; j < values.size(); ++j) {
    if (values[j] > values[best]) best = j;
  }
  return best;
}

}  // namespace resmem
