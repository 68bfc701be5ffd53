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

#include "resmem/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binary_io.h"
#include "resmem/error.h"
#include "resmem/parallel.h"
#include "resmem/rng.h"
#include "resmem/softmax.h"

namespace resmem {
namespace {

constexpr char kMagic[] = "RMLP";
constexpr std::uint32_t kVersion = 1;

void CheckShape(const MlpParams& p) {
  if (p.w1.size() != p.d_in * p.hidden || p.b1.size() != p.hidden ||
      p.w2.size() != p.hidden * p.classes || p.b2.size() != p.classes) {
    throw Error(ErrorCode::kShapeMismatch, "MLP parameter blocks disagree with (d_in, h, c)");
  }
}

void FillUniform(std::span<double> w, double bound, Rng& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& v : w) v = u(rng);
}

}  // namespace

MlpParams MlpParams::Zeros(std::uint64_t d_in, std::uint64_t hidden, std::uint64_t classes) {
  MlpParams p;
  p.d_in = d_in;
  p.hidden = hidden;
  p.classes = classes;
  p.w1.assign(d_in * hidden, 0.0);
  p.b1.assign(hidden, 0.0);
  p.w2.assign(hidden * classes, 0.0);
  p.b2.assign(classes, 0.0);
  return p;
}

std::vector<std::span<double>> MlpParams::Blocks() { return {w1, b1, w2, b2}; }

std::vector<std::span<const double>> MlpParams::Blocks() const { return {w1, b1, w2, b2}; }

MlpParams InitMlp(std::uint64_t d_in, std::uint64_t hidden, std::uint64_t classes,
                  std::uint64_t seed) {
  if (d_in < 1 || hidden < 1 || classes < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need d_in >= 1, h >= 1, c >= 2");
  }
  MlpParams p = MlpParams::Zeros(d_in, hidden, classes);
  Rng rng(seed);
  FillUniform(p.w1, std::sqrt(6.0 / static_cast<double>(d_in + hidden)), rng);
  FillUniform(p.w2, std::sqrt(6.0 / static_cast<double>(hidden + classes)), rng);
  return p;
}

Forward RunForward(const MlpParams& p, std::span<const float> x) {
  if (x.size() != p.d_in) {
    throw Error(ErrorCode::kShapeMismatch, "input has " + std::to_string(x.size()) +
                                               " features, model expects " +
                                               std::to_string(p.d_in));
  }
  Forward out;
  out.hidden.assign(p.b1.begin(), p.b1.end());
  for (std::size_t i = 0; i < p.d_in; ++i) {
    const double xi = x[i];
    const double* row = p.w1.data() + i * p.hidden;
    for (std::size_t j = 0; j < p.hidden; ++j) out.hidden[j] += row[j] * xi;
  }
  for (double& h : out.hidden) h = h > 0.0 ? h : 0.0;
  out.logits.assign(p.b2.begin(), p.b2.end());
  for (std::size_t j = 0; j < p.hidden; ++j) {
    const double hj = out.hidden[j];
    if (hj == 0.0) continue;
    const double* row = p.w2.data() + j * p.classes;
    for (std::size_t k = 0; k < p.classes; ++k) out.logits[k] += row[k] * hj;
  }
  return out;
}

LossAndGrad ComputeLossAndGrad(const MlpParams& p, std::span<const Sample> batch) {
  CheckShape(p);
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  LossAndGrad out{0.0, MlpParams::Zeros(p.d_in, p.hidden, p.classes)};
  MlpParams& g = out.grad;
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<double> dlogits(p.classes);
  std::vector<double> dhidden(p.hidden);
  for (const Sample& s : batch) {
    if (s.label >= p.classes) throw Error(ErrorCode::kLabelOutOfRange, "label >= classes");
    const Forward f = RunForward(p, s.x);
    const std::vector<double> prob = Softmax(f.logits, 1.0);
    out.loss -= LogSoftmaxAt(f.logits, s.label) * scale;

    for (std::size_t k = 0; k < p.classes; ++k) {
      dlogits[k] = (prob[k] - (k == s.label ? 1.0 : 0.0)) * scale;
      g.b2[k] += dlogits[k];
    }
    for (std::size_t j = 0; j < p.hidden; ++j) {
      const double* w2row = p.w2.data() + j * p.classes;
      double* g2row = g.w2.data() + j * p.classes;
      double acc = 0.0;
      for (std::size_t k = 0; k < p.classes; ++k) {
        g2row[k] += f.hidden[j] * dlogits[k];
        acc += w2row[k] * dlogits[k];
      }
      // ReLU subgradient at zero is zero.
      dhidden[j] = f.hidden[j] > 0.0 ? acc : 0.0;
      g.b1[j] += dhidden[j];
    }
    for (std::size_t i = 0; i < p.d_in; ++i) {
      const double xi = s.x[i];
      double* g1row = g.w1.data() + i * p.hidden;
      for (std::size_t j = 0; j < p.hidden; ++j) g1row[j] += xi * dhidden[j];
    }
  }
  return out;
}

TrainResult TrainSgd(const MlpParams& init, const EmbeddingDataset& data, const TrainConfig& cfg) {
  CheckShape(init);
  if (!data.labels) throw Error(ErrorCode::kInvalidArgument, "training data needs labels");
  if (data.d != init.d_in) {
    throw Error(ErrorCode::kShapeMismatch, "feature dimension does not match model input");
  }
  if (cfg.batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning rate must be > 0");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "momentum must lie in [0, 1)");
  }

  TrainResult result{init, {}};
  MlpParams velocity = MlpParams::Zeros(init.d_in, init.hidden, init.classes);
  std::vector<std::uint64_t> order(data.n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  std::vector<Sample> batch;

  for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::uint64_t start = 0; start < data.n; start += cfg.batch_size) {
      const std::uint64_t end = std::min<std::uint64_t>(data.n, start + cfg.batch_size);
      batch.clear();
      for (std::uint64_t i = start; i < end; ++i) {
        batch.push_back({data.embedding(order[i]), data.label(order[i])});
      }
      LossAndGrad lg = ComputeLossAndGrad(result.params, batch);
      if (!std::isfinite(lg.loss)) {
        throw Error(ErrorCode::kNonFiniteLoss, "loss diverged in epoch " + std::to_string(epoch));
      }
      loss_sum += lg.loss * static_cast<double>(end - start);
      auto params = result.params.Blocks();
      auto vel = velocity.Blocks();
      auto grads = std::as_const(lg.grad).Blocks();
      for (std::size_t b = 0; b < params.size(); ++b) {
        for (std::size_t i = 0; i < params[b].size(); ++i) {
          vel[b][i] = cfg.momentum * vel[b][i] - cfg.learning_rate * grads[b][i];
          params[b][i] += vel[b][i];
        }
      }
    }
    const double epoch_loss = loss_sum / static_cast<double>(data.n);
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorCode::kNonFiniteLoss, "loss diverged in epoch " + std::to_string(epoch));
    }
    result.loss_trace.push_back(epoch_loss);
  }
  return result;
}

EmbeddingDataset Embed(const MlpParams& p, const EmbeddingDataset& raw, int threads) {
  CheckShape(p);
  if (raw.d != p.d_in) {
    throw Error(ErrorCode::kShapeMismatch, "feature dimension does not match model input");
  }
  EmbeddingDataset out;
  out.n = raw.n;
  out.d = p.hidden;
  out.c = p.classes;
  out.embeddings.resize(raw.n * p.hidden);
  out.logits.emplace(raw.n * p.classes);
  out.labels = raw.labels;
  ParallelFor(raw.n, threads, [&](std::size_t row) {
    const Forward f = RunForward(p, raw.embedding(row));
    std::transform(f.hidden.begin(), f.hidden.end(), out.embeddings.begin() + row * p.hidden,
                   [](double v) { return static_cast<float>(v); });
    std::transform(f.logits.begin(), f.logits.end(), out.logits->begin() + row * p.classes,
                   [](double v) { return static_cast<float>(v); });
  });
  return out;
}

double Accuracy(const MlpParams& p, const EmbeddingDataset& data) {
  if (!data.labels) throw Error(ErrorCode::kInvalidArgument, "accuracy needs labels");
  std::uint64_t correct = 0;
  for (std::uint64_t i = 0; i < data.n; ++i) {
    const Forward f = RunForward(p, data.embedding(i));
    if (ArgMax(f.logits) == data.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.n);
}

std::vector<char> EncodeMlp(const MlpParams& p) {
  CheckShape(p);
  internal::ByteWriter w;
  w.Magic(kMagic);
  w.Put<std::uint32_t>(kVersion);
  w.Put<std::uint64_t>(p.d_in);
  w.Put<std::uint64_t>(p.hidden);
  w.Put<std::uint64_t>(p.classes);
  for (auto block : p.Blocks()) w.PutAll<double>(block);
  return w.bytes();
}

MlpParams DecodeMlp(std::vector<char> bytes) {
  internal::ByteReader r(std::move(bytes));
  r.ExpectMagic(kMagic);
  const auto version = r.Get<std::uint32_t>();
  if (version != kVersion) {
    throw Error(ErrorCode::kVersionUnsupported, "RMLP version " + std::to_string(version));
  }
  MlpParams p;
  p.d_in = r.Get<std::uint64_t>();
  p.hidden = r.Get<std::uint64_t>();
  p.classes = r.Get<std::uint64_t>();
  p.w1 = r.GetAll<double>(internal::CheckedMul(p.d_in, p.hidden));
  p.b1 = r.GetAll<double>(p.hidden);
  p.w2 = r.GetAll<double>(internal::CheckedMul(p.hidden, p.classes));
  p.b2 = r.GetAll<double>(p.classes);
  r.ExpectEnd();
  for (auto block : std::as_const(p).Blocks()) {
    for (double v : block) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteValue, "non-finite model parameter");
    }
  }
  return p;
}

void SaveMlp(const MlpParams& p, const std::string& path) {
  internal::WriteFileBytes(path, EncodeMlp(p));
}

MlpParams LoadMlp(const std::string& path) { return DecodeMlp(internal::ReadFileBytes(path)); }

}  // namespace resmem
