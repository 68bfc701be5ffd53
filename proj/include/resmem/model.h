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

#ifndef RESMEM_MODEL_H_
#define RESMEM_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "resmem/datastore.h"

namespace resmem {

// One-hidden-layer ReLU classifier. The hidden activation is the embedding
// used for neighbor search. Weights are row-major: w1 is d_in x hidden, w2 is
// hidden x classes.
struct MlpParams {
  std::uint64_t d_in = 0;
  std::uint64_t hidden = 0;
  std::uint64_t classes = 0;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  std::vector<double> b2;

  static MlpParams Zeros(std::uint64_t d_in, std::uint64_t hidden, std::uint64_t classes);

  std::size_t ParameterCount() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  // All parameter blocks in field order, for optimizers and finite differences.
  std::vector<std::span<double>> Blocks();
  std::vector<std::span<const double>> Blocks() const;

  bool operator==(const MlpParams&) const = default;
};

struct TrainConfig {
  std::uint64_t epochs = 10;
  std::uint64_t batch_size = 32;
  double learning_rate = 0.1;
  double momentum = 0.5;
  std::uint64_t seed = 0;
};

struct Forward {
  std::vector<double> hidden;
  std::vector<double> logits;
};

struct Sample {
  std::span<const float> x;
  std::uint32_t label = 0;
};

struct LossAndGrad {
  double loss = 0.0;
  MlpParams grad;
};

struct TrainResult {
  MlpParams params;
  std::vector<double> loss_trace;  // mean loss per epoch
};

// Glorot-uniform weights, zero biases.
MlpParams InitMlp(std::uint64_t d_in, std::uint64_t hidden, std::uint64_t classes,
                  std::uint64_t seed);

Forward RunForward(const MlpParams& p, std::span<const float> x);

// Mean softmax cross-entropy over the batch and its exact gradient.
LossAndGrad ComputeLossAndGrad(const MlpParams& p, std::span<const Sample> batch);

// Minibatch SGD with momentum; the dataset's embedding slot is the input.
TrainResult TrainSgd(const MlpParams& init, const EmbeddingDataset& data, const TrainConfig& cfg);

// Replaces the embedding slot with hidden activations and fills logits.
// Labels are carried over.
EmbeddingDataset Embed(const MlpParams& p, const EmbeddingDataset& raw, int threads = 1);

// Fraction of rows whose argmax logit equals the label.
double Accuracy(const MlpParams& p, const EmbeddingDataset& data);

std::vector<char> EncodeMlp(const MlpParams& p);
MlpParams DecodeMlp(std::vector<char> bytes);
void SaveMlp(const MlpParams& p, const std::string& path);
MlpParams LoadMlp(const std::string& path);

}  // namespace resmem

#endif  // RESMEM_MODEL_H_
