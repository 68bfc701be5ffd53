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

#include "resmem/evalsuite.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <tuple>

#include "resmem/error.h"
#include "resmem/parallel.h"
#include "resmem/softmax.h"

namespace resmem {
namespace {

std::vector<float> ToFloat(const std::vector<double>& v) {
  return std::vector<float>(v.begin(), v.end());
}

void CheckEmbedded(const EmbeddingDataset& ds, const char* what) {
  if (!ds.logits || !ds.labels) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " must carry logits and labels (embed it first)");
  }
}

}  // namespace

Prediction ScoreBase(std::span<const float> logits, double temperature) {
  Prediction out;
  out.scores = Softmax(logits, temperature);
  out.label = ArgMax(out.scores);
  return out;
}

Prediction ScoreResMem(std::span<const float> logits, std::span<const float> embedding,
                       const SoftKnnIndex& index, const SparseResidualStore& store,
                       const HyperParams& hp, std::uint64_t n_probe) {
  hp.Validate();
  if (static_cast<float>(hp.temperature) != store.temperature()) {
    throw Error(ErrorCode::kTemperatureMismatch,
                "residual store was built at T=" + FormatNumber(store.temperature()) +
                    ", prediction uses T=" + FormatNumber(hp.temperature));
  }
  if (logits.size() != store.c()) {
    throw Error(ErrorCode::kShapeMismatch, "logit width differs from residual classes");
  }
  Prediction out;
  out.scores = Softmax(logits, hp.temperature);
  const std::vector<double> r = KnnResidual(index, store, embedding, hp, n_probe);
  for (std::size_t j = 0; j < r.size(); ++j) out.scores[j] += r[j];
  out.label = ArgMax(out.scores);
  return out;
}

Prediction PredictBase(const MlpParams& p, std::span<const float> x, double temperature) {
  const Forward f = RunForward(p, x);
  return ScoreBase(ToFloat(f.logits), temperature);
}

Prediction PredictResMem(const MlpParams& p, const SoftKnnIndex& index,
                         const SparseResidualStore& store, std::span<const float> x,
                         const HyperParams& hp, std::uint64_t n_probe) {
  const Forward f = RunForward(p, x);
  return ScoreResMem(ToFloat(f.logits), ToFloat(f.hidden), index, store, hp, n_probe);
}

Metrics Metrics::FromCounts(std::uint64_t n_eval, std::uint64_t base_correct,
                            std::uint64_t resmem_correct, std::uint64_t tp, std::uint64_t fp) {
  if (n_eval == 0) throw Error(ErrorCode::kInvalidArgument, "metrics need n_eval >= 1");
  if (base_correct > n_eval || resmem_correct > n_eval || tp + fp > n_eval ||
      tp > n_eval - base_correct || fp > base_correct) {
    throw Error(ErrorCode::kInvalidArgument, "inconsistent evaluation counts");
  }
  // Integer form of gain = tpr - fpr.
  if (static_cast<std::int64_t>(tp) - static_cast<std::int64_t>(fp) !=
      static_cast<std::int64_t>(resmem_correct) - static_cast<std::int64_t>(base_correct)) {
    throw Error(ErrorCode::kInvalidArgument, "tp - fp != resmem_correct - base_correct");
  }
  Metrics m;
  m.n_eval_ = n_eval;
  m.base_correct_ = base_correct;
  m.resmem_correct_ = resmem_correct;
  m.tp_ = tp;
  m.fp_ = fp;
  return m;
}

Metrics Evaluate(const EmbeddingDataset& eval_set, const SoftKnnIndex& index,
                 const SparseResidualStore& store, const HyperParams& hp, std::uint64_t n_probe,
                 int threads) {
  CheckEmbedded(eval_set, "evaluation set");
  if (eval_set.d != index.d()) {
    throw Error(ErrorCode::kShapeMismatch, "evaluation embeddings differ in width from the index");
  }
  // Per-example outcome bits: 1 = base correct, 2 = ResMem correct.
  std::vector<std::uint8_t> outcome(eval_set.n);
  ParallelFor(eval_set.n, threads, [&](std::size_t i) {
    const std::uint32_t y = eval_set.label(i);
    const Prediction base = ScoreBase(eval_set.logit_row(i), hp.temperature);
    const Prediction rm =
        ScoreResMem(eval_set.logit_row(i), eval_set.embedding(i), index, store, hp, n_probe);
    outcome[i] = static_cast<std::uint8_t>((base.label == y ? 1 : 0) | (rm.label == y ? 2 : 0));
  });
  std::uint64_t base_correct = 0, resmem_correct = 0, tp = 0, fp = 0;
  for (std::uint8_t o : outcome) {
    const bool b = o & 1, r = o & 2;
    base_correct += b;
    resmem_correct += r;
    tp += (!b && r);
    fp += (b && !r);
  }
  return Metrics::FromCounts(eval_set.n, base_correct, resmem_correct, tp, fp);
}

Metrics Evaluate(const MlpParams& p, const SoftKnnIndex& index, const SparseResidualStore& store,
                 const EmbeddingDataset& raw_eval_set, const HyperParams& hp,
                 std::uint64_t n_probe, int threads) {
  return Evaluate(Embed(p, raw_eval_set, threads), index, store, hp, n_probe, threads);
}

SelectionRule SelectionRule::Parse(const std::string& text) {
  if (text == "acc") return MaxAccuracy();
  const std::string prefix = "tpr-cap=";
  if (text.rfind(prefix, 0) == 0) {
    const std::string value = text.substr(prefix.size());
    double cap = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), cap);
    if (ec == std::errc() && ptr == value.data() + value.size() && cap > 0.0 && cap <= 1.0) {
      return MaxTprFprCap(cap);
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "rule must be 'acc' or 'tpr-cap=<value in (0,1]>'");
}

std::string SelectionRule::ToString() const {
  return kind == Kind::kMaxAccuracy ? "acc" : "tpr-cap=" + FormatNumber(cap);
}

std::size_t SelectRow(const std::vector<SweepRow>& rows, const SelectionRule& rule) {
  auto key = [](const SweepRow& r) {
    return std::make_tuple(r.hp.k, r.hp.sigma, r.hp.temperature, r.n_probe);
  };
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Metrics& m = rows[i].metrics;
    std::uint64_t score = 0;
    if (rule.kind == SelectionRule::Kind::kMaxAccuracy) {
      score = m.resmem_correct();
    } else {
      if (!(m.fpr() < rule.cap)) continue;
      score = m.tp();
    }
    if (!best) {
      best = i;
      continue;
    }
    const Metrics& bm = rows[*best].metrics;
    const std::uint64_t best_score =
        rule.kind == SelectionRule::Kind::kMaxAccuracy ? bm.resmem_correct() : bm.tp();
    if (score > best_score || (score == best_score && key(rows[i]) < key(rows[*best]))) best = i;
  }
  if (!best) {
    throw Error(ErrorCode::kNoFeasiblePoint,
                "no grid point satisfies fpr < " + FormatNumber(rule.cap));
  }
  return *best;
}

SweepResult Sweep(const EmbeddingDataset& train_set, const EmbeddingDataset& val_set,
                  const SoftKnnIndex& index, const SweepGrid& grid, const SelectionRule& rule,
                  std::uint64_t top_m, int threads) {
  CheckEmbedded(train_set, "training set");
  CheckEmbedded(val_set, "validation set");
  if (grid.k.empty() || grid.sigma.empty() || grid.temperature.empty() || grid.n_probe.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "every sweep grid axis needs at least one value");
  }
  std::map<double, SparseResidualStore> stores;
  for (double t : grid.temperature) {
    if (!stores.contains(t)) stores.emplace(t, ComputeResiduals(train_set, t, top_m, threads));
  }

  SweepResult result;
  result.rule = rule;
  for (auto k : grid.k) {
    for (double s : grid.sigma) {
      for (double t : grid.temperature) {
        for (auto p : grid.n_probe) {
          HyperParams hp{k, s, t};
          hp.Validate();
          result.rows.push_back({hp, p, Metrics{}});
        }
      }
    }
  }
  ParallelFor(result.rows.size(), threads, [&](std::size_t i) {
    SweepRow& row = result.rows[i];
    row.metrics = Evaluate(val_set, index, stores.at(row.hp.temperature), row.hp, row.n_probe, 1);
  });
  result.selected = SelectRow(result.rows, rule);
  return result;
}

SweepResult Sweep(const MlpParams& p, const EmbeddingDataset& raw_train,
                  const EmbeddingDataset& raw_val, const SweepGrid& grid,
                  const SelectionRule& rule, int threads) {
  const EmbeddingDataset train = Embed(p, raw_train, threads);
  const EmbeddingDataset val = Embed(p, raw_val, threads);
  const SoftKnnIndex index = SoftKnnIndex::BuildExact(train.embeddings, train.n, train.d);
  return Sweep(train, val, index, grid, rule, 0, threads);
}

std::string FormatNumber(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string MetricsCsvRow(const HyperParams& hp, std::uint64_t n_probe, const Metrics& m) {
  return std::to_string(hp.k) + "," + FormatNumber(hp.sigma) + "," + FormatNumber(hp.temperature) +
         "," + std::to_string(n_probe) + "," + FormatNumber(m.acc_base()) + "," +
         FormatNumber(m.acc_resmem()) + "," + FormatNumber(m.gain()) + "," +
         FormatNumber(m.tpr()) + "," + FormatNumber(m.fpr());
}

std::string MetricsRecord(const HyperParams& hp, std::uint64_t n_probe, const Metrics& m) {
  return "k=" + std::to_string(hp.k) + " sigma=" + FormatNumber(hp.sigma) +
         " temp=" + FormatNumber(hp.temperature) + " n_probe=" + std::to_string(n_probe) +
         " n_eval=" + std::to_string(m.n_eval()) + " acc_base=" + FormatNumber(m.acc_base()) +
         " acc_resmem=" + FormatNumber(m.acc_resmem()) + " gain=" + FormatNumber(m.gain()) +
         " tpr=" + FormatNumber(m.tpr()) + " fpr=" + FormatNumber(m.fpr()) +
         " tp=" + std::to_string(m.tp()) + " fp=" + std::to_string(m.fp());
}

}  // namespace resmem
