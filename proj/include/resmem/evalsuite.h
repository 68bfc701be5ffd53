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

#ifndef RESMEM_EVALSUITE_H_
#define RESMEM_EVALSUITE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resmem/datastore.h"
#include "resmem/knn.h"
#include "resmem/model.h"
#include "resmem/residual.h"

namespace resmem {

struct Prediction {
  std::vector<double> scores;
  std::uint32_t label = 0;
};

// Scoring from an embedded row (f32 embedding and logits, as stored on disk).
Prediction ScoreBase(std::span<const float> logits, double temperature);
Prediction ScoreResMem(std::span<const float> logits, std::span<const float> embedding,
                       const SoftKnnIndex& index, const SparseResidualStore& store,
                       const HyperParams& hp, std::uint64_t n_probe);

// Same, starting from raw features. Hidden activations and logits are rounded
// to f32 first so these agree with scoring an embedded dataset.
Prediction PredictBase(const MlpParams& p, std::span<const float> x, double temperature);
Prediction PredictResMem(const MlpParams& p, const SoftKnnIndex& index,
                         const SparseResidualStore& store, std::span<const float> x,
                         const HyperParams& hp, std::uint64_t n_probe);

// Evaluation counts. TP: base wrong and ResMem right; FP: base right and
// ResMem wrong. All rates share the n_eval denominator.
class Metrics {
 public:
  // Throws InvalidArgument unless tp - fp == resmem_correct - base_correct and
  // every count is consistent with n_eval.
  static Metrics FromCounts(std::uint64_t n_eval, std::uint64_t base_correct,
                            std::uint64_t resmem_correct, std::uint64_t tp, std::uint64_t fp);

  std::uint64_t n_eval() const { return n_eval_; }
  std::uint64_t base_correct() const { return base_correct_; }
  std::uint64_t resmem_correct() const { return resmem_correct_; }
  std::uint64_t tp() const { return tp_; }
  std::uint64_t fp() const { return fp_; }

  double acc_base() const { return Rate(base_correct_); }
  double acc_resmem() const { return Rate(resmem_correct_); }
  double tpr() const { return Rate(tp_); }
  double fpr() const { return Rate(fp_); }
  // (tp - fp) / n_eval, which equals (resmem_correct - base_correct) / n_eval.
  double gain() const {
    return (static_cast<double>(tp_) - static_cast<double>(fp_)) / static_cast<double>(n_eval_);
  }

  bool operator==(const Metrics&) const = default;

 private:
  double Rate(std::uint64_t count) const {
    return static_cast<double>(count) / static_cast<double>(n_eval_);
  }

  std::uint64_t n_eval_ = 0;
  std::uint64_t base_correct_ = 0;
  std::uint64_t resmem_correct_ = 0;
  std::uint64_t tp_ = 0;
  std::uint64_t fp_ = 0;
};

// eval_set must be embedded (embedding slot = hidden activations, logits
// present) and labeled.
Metrics Evaluate(const EmbeddingDataset& eval_set, const SoftKnnIndex& index,
                 const SparseResidualStore& store, const HyperParams& hp, std::uint64_t n_probe,
                 int threads = 1);
Metrics Evaluate(const MlpParams& p, const SoftKnnIndex& index, const SparseResidualStore& store,
                 const EmbeddingDataset& raw_eval_set, const HyperParams& hp,
                 std::uint64_t n_probe, int threads = 1);

struct SelectionRule {
  enum class Kind { kMaxAccuracy, kMaxTprFprCap };
  Kind kind = Kind::kMaxAccuracy;
  double cap = 0.05;  // strict: fpr < cap

  static SelectionRule MaxAccuracy() { return {}; }
  static SelectionRule MaxTprFprCap(double cap) { return {Kind::kMaxTprFprCap, cap}; }
  // "acc" or "tpr-cap=<value>".
  static SelectionRule Parse(const std::string& text);
  std::string ToString() const;
};

struct SweepGrid {
  std::vector<std::uint64_t> k;
  std::vector<double> sigma;
  std::vector<double> temperature;
  std::vector<std::uint64_t> n_probe = {1};
};

struct SweepRow {
  HyperParams hp;
  std::uint64_t n_probe = 1;
  Metrics metrics;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // k, sigma, temperature, n_probe nested in grid order
  std::size_t selected = 0;
  SelectionRule rule;

  const SweepRow& best() const { return rows[selected]; }
};

// Index of the row chosen by `rule`; ties go to the lexicographically smallest
// (k, sigma, temperature, n_probe). Throws NoFeasiblePoint.
std::size_t SelectRow(const std::vector<SweepRow>& rows, const SelectionRule& rule);

// Residual stores are rebuilt per temperature from train_set; the index is
// shared by every grid point. Both sets must be embedded.
SweepResult Sweep(const EmbeddingDataset& train_set, const EmbeddingDataset& val_set,
                  const SoftKnnIndex& index, const SweepGrid& grid, const SelectionRule& rule,
                  std::uint64_t top_m = 0, int threads = 1);
// Embeds both raw sets with p and searches an exact index.
SweepResult Sweep(const MlpParams& p, const EmbeddingDataset& raw_train,
                  const EmbeddingDataset& raw_val, const SweepGrid& grid,
                  const SelectionRule& rule, int threads = 1);

inline constexpr char kMetricsCsvHeader[] = "k,sigma,temp,n_probe,acc_base,acc_resmem,gain,tpr,fpr";

std::string FormatNumber(double value);
std::string MetricsCsvRow(const HyperParams& hp, std::uint64_t n_probe, const Metrics& m);
// Single-line key=value record.
std::string MetricsRecord(const HyperParams& hp, std::uint64_t n_probe, const Metrics& m);

}  // namespace resmem

#endif  // RESMEM_EVALSUITE_H_
