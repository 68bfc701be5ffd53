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

#include "resmem/cli.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "resmem/datastore.h"
#include "resmem/error.h"
#include "resmem/evalsuite.h"
#include "resmem/knn.h"
#include "resmem/model.h"
#include "resmem/residual.h"
#include "resmem/synthetic.h"
#include "resmem/theory.h"

namespace resmem {
namespace {

// Resolved flags in declaration order. Thread count and output paths are
// echoed to stdout but kept out of file headers so files are identical
// across --threads values and destinations.
class ConfigEcho {
 public:
  explicit ConfigEcho(std::string subcommand) : subcommand_(std::move(subcommand)) {}

  template <typename T>
  void Add(const std::string& key, const T& value) {
    entries_.emplace_back(key, ToText(value));
  }
  template <typename T>
  void AddRuntime(const std::string& key, const T& value) {
    runtime_.emplace_back(key, ToText(value));
  }

  std::string FileHeader() const { return Line(false); }
  std::string StdoutLine() const { return Line(true); }

 private:
  static std::string ToText(const std::string& s) { return s.empty() ? "-" : s; }
  static std::string ToText(const char* s) { return ToText(std::string(s)); }
  static std::string ToText(bool b) { return b ? "true" : "false"; }
  static std::string ToText(double v) { return FormatNumber(v); }
  static std::string ToText(std::uint64_t v) { return std::to_string(v); }
  static std::string ToText(int v) { return std::to_string(v); }
  template <typename T>
  static std::string ToText(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + ToText(v[i]);
    return s;
  }

  std::string Line(bool with_runtime) const {
    std::string s = std::string("# resmem ") + kToolVersion + " " + subcommand_;
    for (const auto& [k, v] : entries_) s += " " + k + "=" + v;
    if (with_runtime) {
      for (const auto& [k, v] : runtime_) s += " " + k + "=" + v;
    }
    return s;
  }

  std::string subcommand_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::pair<std::string, std::string>> runtime_;
};

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIoError, "cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

// Dataset with hidden-activation embeddings and logits: computed through the
// model when one is given, otherwise taken from the file as exported.
EmbeddingDataset LoadEmbedded(const std::string& data_path, const std::string& model_path,
                              int threads) {
  EmbeddingDataset raw = LoadDataset(data_path);
  if (model_path.empty()) {
    if (!raw.logits || !raw.labels) {
      throw Error(ErrorCode::kShapeMismatch,
                  data_path + " has no logits/labels; pass --model to compute them");
    }
    return raw;
  }
  return Embed(LoadMlp(model_path), raw, threads);
}

SoftKnnIndex LoadOrBuildIndex(const std::string& index_path, const EmbeddingDataset& train) {
  if (index_path.empty()) return SoftKnnIndex::BuildExact(train.embeddings, train.n, train.d);
  return SoftKnnIndex::Load(index_path, train.embeddings);
}

struct DemoSynthOptions {
  std::uint64_t seed = 7, n = 2000, d = 16, c = 20;
  std::string out;
};

int RunDemoSynth(const DemoSynthOptions& o, std::ostream& out) {
  ConfigEcho cfg("demo-synth");
  cfg.Add("seed", o.seed);
  cfg.Add("n", o.n);
  cfg.Add("d", o.d);
  cfg.Add("c", o.c);
  cfg.AddRuntime("out", o.out);
  out << cfg.StdoutLine() << "\n";
  SaveDataset(DemoSynthetic(o.seed, o.n, o.d, o.c), o.out);
  out << "n=" << o.n << " d=" << o.d << " c=" << o.c << "\n";
  return kExitOk;
}

struct TrainOptions {
  std::string data, out;
  std::uint64_t hidden = 8, epochs = 5, batch = 32, seed = 0;
  double lr = 0.1, momentum = 0.5;
};

int RunTrainBase(const TrainOptions& o, std::ostream& out) {
  ConfigEcho cfg("train-base");
  cfg.Add("data", o.data);
  cfg.Add("hidden", o.hidden);
  cfg.Add("epochs", o.epochs);
  cfg.Add("lr", o.lr);
  cfg.Add("momentum", o.momentum);
  cfg.Add("batch", o.batch);
  cfg.Add("seed", o.seed);
  cfg.AddRuntime("out", o.out);
  out << cfg.StdoutLine() << "\n";
  const EmbeddingDataset data = LoadDataset(o.data);
  if (!data.labels) throw Error(ErrorCode::kShapeMismatch, o.data + " has no labels");
  TrainConfig tc{o.epochs, o.batch, o.lr, o.momentum, o.seed};
  const MlpParams init = InitMlp(data.d, o.hidden, data.c, o.seed);
  const TrainResult result = TrainSgd(init, data, tc);
  for (std::size_t e = 0; e < result.loss_trace.size(); ++e) {
    out << "epoch=" << e + 1 << " loss=" << FormatNumber(result.loss_trace[e]) << "\n";
  }
  out << "train_acc=" << FormatNumber(Accuracy(result.params, data)) << "\n";
  SaveMlp(result.params, o.out);
  return kExitOk;
}

struct BuildIndexOptions {
  std::string data, model, out;
  std::uint64_t ivf_lists = 0, iters = 10, seed = 0;
  int threads = 1;
};

int RunBuildIndex(const BuildIndexOptions& o, std::ostream& out) {
  ConfigEcho cfg("build-index");
  cfg.Add("data", o.data);
  cfg.Add("model", o.model);
  cfg.Add("ivf-lists", o.ivf_lists);
  cfg.Add("iters", o.iters);
  cfg.Add("seed", o.seed);
  cfg.AddRuntime("out", o.out);
  cfg.AddRuntime("threads", o.threads);
  out << cfg.StdoutLine() << "\n";
  EmbeddingDataset train = LoadEmbedded(o.data, o.model, o.threads);
  const SoftKnnIndex index =
      o.ivf_lists == 0
          ? SoftKnnIndex::BuildExact(std::move(train.embeddings), train.n, train.d)
          : SoftKnnIndex::BuildIvf(std::move(train.embeddings), train.n, train.d, o.ivf_lists,
                                   o.iters, o.seed, o.threads);
  index.Save(o.out);
  out << "kind=" << (index.kind() == SoftKnnIndex::Kind::kExact ? "exact" : "ivf")
      << " n=" << index.n() << " d=" << index.d() << " n_list=" << index.n_list() << "\n";
  return kExitOk;
}

struct BuildResidualsOptions {
  std::string data, model, out;
  double temp = 1.0;
  std::uint64_t top_m = 0;
  int threads = 1;
};

int RunBuildResiduals(const BuildResidualsOptions& o, std::ostream& out) {
  ConfigEcho cfg("build-residuals");
  cfg.Add("data", o.data);
  cfg.Add("model", o.model);
  cfg.Add("temp", o.temp);
  cfg.Add("top-m", o.top_m);
  cfg.AddRuntime("out", o.out);
  cfg.AddRuntime("threads", o.threads);
  out << cfg.StdoutLine() << "\n";
  const EmbeddingDataset train = LoadEmbedded(o.data, o.model, o.threads);
  const SparseResidualStore store = ComputeResiduals(train, o.temp, o.top_m, o.threads);
  SaveResidualStore(store, o.out);
  out << "n=" << store.n() << " c=" << store.c() << " m=" << store.m()
      << " temp=" << FormatNumber(store.temperature()) << "\n";
  return kExitOk;
}

struct EvalOptions {
  std::string data, train, model, index, residuals, out;
  std::uint64_t k = 1, n_probe = 1, top_m = 0;
  double sigma = 1.0, temp = 1.0;
  int threads = 1;
};

int RunEval(const EvalOptions& o, std::ostream& out) {
  const std::string train_path = o.train.empty() ? o.data : o.train;
  ConfigEcho cfg("eval");
  cfg.Add("data", o.data);
  cfg.Add("train", train_path);
  cfg.Add("model", o.model);
  cfg.Add("index", o.index);
  cfg.Add("residuals", o.residuals);
  cfg.Add("k", o.k);
  cfg.Add("sigma", o.sigma);
  cfg.Add("temp", o.temp);
  cfg.Add("n-probe", o.n_probe);
  cfg.Add("top-m", o.top_m);
  cfg.AddRuntime("out", o.out);
  cfg.AddRuntime("threads", o.threads);
  out << cfg.StdoutLine() << "\n";

  const HyperParams hp{o.k, o.sigma, o.temp};
  hp.Validate();
  const EmbeddingDataset train = LoadEmbedded(train_path, o.model, o.threads);
  const EmbeddingDataset eval_set = LoadEmbedded(o.data, o.model, o.threads);
  const SoftKnnIndex index = LoadOrBuildIndex(o.index, train);
  const SparseResidualStore store = o.residuals.empty()
                                        ? ComputeResiduals(train, o.temp, o.top_m, o.threads)
                                        : LoadResidualStore(o.residuals);
  const Metrics m = Evaluate(eval_set, index, store, hp, o.n_probe, o.threads);

  const std::string table = std::string(kMetricsCsvHeader) + "\n" +
                            MetricsCsvRow(hp, o.n_probe, m) + "\n";
  out << MetricsRecord(hp, o.n_probe, m) << "\n" << table;
  if (!o.out.empty()) WriteText(o.out, cfg.FileHeader() + "\n" + table);
  return kExitOk;
}

struct SweepOptions {
  std::string train, val, model, index, rule = "acc", out;
  std::vector<std::uint64_t> grid_k = {1, 5, 15, 50};
  std::vector<double> grid_sigma = {0.3, 0.7, 1.5};
  std::vector<double> grid_temp = {0.7, 1.0, 1.4};
  std::vector<std::uint64_t> grid_n_probe = {1};
  std::uint64_t top_m = 0;
  int threads = 1;
};

int RunSweep(const SweepOptions& o, std::ostream& out) {
  ConfigEcho cfg("sweep");
  cfg.Add("train", o.train);
  cfg.Add("val", o.val);
  cfg.Add("model", o.model);
  cfg.Add("index", o.index);
  cfg.Add("rule", o.rule);
  cfg.Add("grid-k", o.grid_k);
  cfg.Add("grid-sigma", o.grid_sigma);
  cfg.Add("grid-temp", o.grid_temp);
  cfg.Add("grid-n-probe", o.grid_n_probe);
  cfg.Add("top-m", o.top_m);
  cfg.AddRuntime("out", o.out);
  cfg.AddRuntime("threads", o.threads);
  out << cfg.StdoutLine() << "\n";

  const SelectionRule rule = SelectionRule::Parse(o.rule);
  const EmbeddingDataset train = LoadEmbedded(o.train, o.model, o.threads);
  const EmbeddingDataset val = LoadEmbedded(o.val, o.model, o.threads);
  const SoftKnnIndex index = LoadOrBuildIndex(o.index, train);
  const SweepGrid grid{o.grid_k, o.grid_sigma, o.grid_temp, o.grid_n_probe};
  const SweepResult result = Sweep(train, val, index, grid, rule, o.top_m, o.threads);

  std::string table = std::string(kMetricsCsvHeader) + "\n";
  for (const SweepRow& row : result.rows) {
    table += MetricsCsvRow(row.hp, row.n_probe, row.metrics) + "\n";
  }
  out << table;
  out << "selected rule=" << rule.ToString() << " "
      << MetricsRecord(result.best().hp, result.best().n_probe, result.best().metrics) << "\n";
  if (!o.out.empty()) WriteText(o.out, cfg.FileHeader() + "\n" + table);
  return kExitOk;
}

struct TheorySimOptions {
  std::uint64_t d = 2, trials = 50, m_test = 100, seed = 0;
  double L = 0.5;
  std::vector<std::uint64_t> n_grid = {16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  bool random_theta = false;
  std::string out;
  int threads = 1;
};

int RunTheorySim(const TheorySimOptions& o, std::ostream& out) {
  ConfigEcho cfg("theory-sim");
  cfg.Add("d", o.d);
  cfg.Add("L", o.L);
  cfg.Add("n-grid", o.n_grid);
  cfg.Add("trials", o.trials);
  cfg.Add("m-test", o.m_test);
  cfg.Add("seed", o.seed);
  cfg.Add("random-theta", o.random_theta);
  cfg.AddRuntime("out", o.out);
  cfg.AddRuntime("threads", o.threads);
  out << cfg.StdoutLine() << "\n";

  const auto prob = theory::LinearProblem::Make(o.d, o.L, o.seed, o.random_theta);
  const theory::RiskTable table = theory::RiskCurve(prob, o.n_grid, o.trials, o.m_test, o.threads);
  std::string csv = "n,total_mean,total_se,t1_mean,t1_se,t2_mean,t2_se,erm_mean,erm_se,nn_mean,nn_se\n";
  std::uint64_t violations = 0;
  for (const auto& r : table.rows) {
    csv += std::to_string(r.n);
    for (const auto* f : {&r.total, &r.t1, &r.t2, &r.erm_only, &r.pure_nn}) {
      csv += "," + FormatNumber(f->mean) + "," + FormatNumber(f->se);
    }
    csv += "\n";
    violations += r.decomposition_violations;
  }
  out << csv << "decomposition_violations=" << violations << "\n";
  if (!o.out.empty()) WriteText(o.out, cfg.FileHeader() + "\n" + csv);
  return kExitOk;
}

struct ZnnOptions {
  std::uint64_t d = 2, trials = 1000, seed = 0;
  std::vector<std::uint64_t> n_grid = {4, 16, 64, 256, 1024};
  std::string out;
  int threads = 1;
};

int RunZnnCheck(const ZnnOptions& o, std::ostream& out) {
  ConfigEcho cfg("znn-check");
  cfg.Add("d", o.d);
  cfg.Add("n-grid", o.n_grid);
  cfg.Add("trials", o.trials);
  cfg.Add("seed", o.seed);
  cfg.AddRuntime("out", o.out);
  cfg.AddRuntime("threads", o.threads);
  out << cfg.StdoutLine() << "\n";
  const auto rows = theory::ZnnConcentration(o.d, o.n_grid, o.trials, o.seed, o.threads);
  std::string csv = "n,zn_mean,zn_se,bound,ratio\n";
  for (const auto& r : rows) {
    csv += std::to_string(r.n) + "," + FormatNumber(r.zn.mean) + "," + FormatNumber(r.zn.se) +
           "," + FormatNumber(r.bound) + "," + FormatNumber(r.ratio) + "\n";
  }
  out << csv;
  if (!o.out.empty()) WriteText(o.out, cfg.FileHeader() + "\n" + csv);
  return kExitOk;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double ParseDouble(const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kShapeMismatch, "cannot parse number '" + text + "'");
}

struct RateFitOptions {
  std::string in, field = "t1";
};

int RunRateFit(const RateFitOptions& o, std::ostream& out) {
  ConfigEcho cfg("rate-fit");
  cfg.Add("in", o.in);
  cfg.Add("field", o.field);
  out << cfg.StdoutLine() << "\n";

  static const std::map<std::string, std::string> kAliases = {
      {"erm_only", "erm"}, {"pure_nn", "nn"}};
  const auto alias = kAliases.find(o.field);
  const std::string column = (alias == kAliases.end() ? o.field : alias->second) + "_mean";

  std::ifstream f(o.in);
  if (!f) throw Error(ErrorCode::kIoError, "cannot open " + o.in);
  std::string line;
  std::vector<std::string> header;
  std::vector<double> n, mean;
  std::ptrdiff_t col = -1;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = SplitCsvLine(line);
    if (header.empty()) {
      header = cells;
      auto it = std::find(header.begin(), header.end(), column);
      if (header.empty() || header[0] != "n" || it == header.end()) {
        throw Error(ErrorCode::kInvalidArgument, o.in + " has no 'n' and '" + column + "' columns");
      }
      col = it - header.begin();
      continue;
    }
    if (cells.size() != header.size()) throw Error(ErrorCode::kShapeMismatch, "ragged CSV row");
    n.push_back(ParseDouble(cells[0]));
    mean.push_back(ParseDouble(cells[static_cast<std::size_t>(col)]));
  }
  const double slope = theory::RateFit(n, mean);
  out << "field=" << o.field << " rows=" << n.size() << " slope=" << FormatNumber(slope) << "\n";
  return kExitOk;
}

int ExitCodeFor(ErrorCode code) {
  if (code == ErrorCode::kInvalidArgument) return kExitUsage;
  return IsNumericFailure(code) ? kExitNumeric : kExitData;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Residual memorization toolkit", "resmem"};
  app.require_subcommand(1);
  std::function<int()> action;

  DemoSynthOptions demo;
  auto* sc = app.add_subcommand("demo-synth", "Write a Gaussian-mixture classification dataset");
  sc->add_option("--seed", demo.seed);
  sc->add_option("--n", demo.n)->check(CLI::PositiveNumber);
  sc->add_option("--d", demo.d)->check(CLI::PositiveNumber);
  sc->add_option("--c", demo.c)->check(CLI::Range(2, 1 << 30));
  sc->add_option("--out", demo.out)->required();
  sc->callback([&] { action = [&] { return RunDemoSynth(demo, out); }; });

  TrainOptions train;
  sc = app.add_subcommand("train-base", "Train the base classifier");
  sc->add_option("--data", train.data)->required();
  sc->add_option("--hidden", train.hidden)->check(CLI::PositiveNumber);
  sc->add_option("--epochs", train.epochs);
  sc->add_option("--lr", train.lr)->check(CLI::PositiveNumber);
  sc->add_option("--momentum", train.momentum)->check(CLI::Range(0.0, 0.999999));
  sc->add_option("--batch", train.batch)->check(CLI::PositiveNumber);
  sc->add_option("--seed", train.seed);
  sc->add_option("--out", train.out)->required();
  sc->callback([&] { action = [&] { return RunTrainBase(train, out); }; });

  BuildIndexOptions bidx;
  sc = app.add_subcommand("build-index", "Build a neighbor index over training embeddings");
  sc->add_option("--data", bidx.data)->required();
  sc->add_option("--model", bidx.model, "Omit when the file already holds embeddings");
  sc->add_option("--ivf-lists", bidx.ivf_lists, "0 builds an exact index");
  sc->add_option("--iters", bidx.iters);
  sc->add_option("--seed", bidx.seed);
  sc->add_option("--out", bidx.out)->required();
  sc->add_option("--threads", bidx.threads)->check(CLI::PositiveNumber);
  sc->callback([&] { action = [&] { return RunBuildIndex(bidx, out); }; });

  BuildResidualsOptions bres;
  sc = app.add_subcommand("build-residuals", "Compute the residual store for training data");
  sc->add_option("--data", bres.data)->required();
  sc->add_option("--model", bres.model);
  sc->add_option("--temp", bres.temp)->check(CLI::PositiveNumber);
  sc->add_option("--top-m", bres.top_m, "0 keeps every class");
  sc->add_option("--out", bres.out)->required();
  sc->add_option("--threads", bres.threads)->check(CLI::PositiveNumber);
  sc->callback([&] { action = [&] { return RunBuildResiduals(bres, out); }; });

  EvalOptions ev;
  sc = app.add_subcommand("eval", "Evaluate base and ResMem predictions");
  sc->add_option("--data", ev.data, "Evaluation set")->required();
  sc->add_option("--train", ev.train, "Memorized training set (defaults to --data)");
  sc->add_option("--model", ev.model);
  sc->add_option("--index", ev.index, "Defaults to an exact index over --train");
  sc->add_option("--residuals", ev.residuals, "Defaults to residuals computed from --train");
  sc->add_option("--k", ev.k)->required()->check(CLI::PositiveNumber);
  sc->add_option("--sigma", ev.sigma)->required();
  sc->add_option("--temp", ev.temp)->required();
  sc->add_option("--n-probe", ev.n_probe)->check(CLI::PositiveNumber);
  sc->add_option("--top-m", ev.top_m);
  sc->add_option("--out", ev.out);
  sc->add_option("--threads", ev.threads)->check(CLI::PositiveNumber);
  sc->callback([&] { action = [&] { return RunEval(ev, out); }; });

  SweepOptions sw;
  sc = app.add_subcommand("sweep", "Grid search over k, sigma and temperature");
  sc->add_option("--train", sw.train)->required();
  sc->add_option("--val", sw.val)->required();
  sc->add_option("--model", sw.model);
  sc->add_option("--index", sw.index);
  sc->add_option("--rule", sw.rule, "acc | tpr-cap=<fpr cap>");
  sc->add_option("--grid-k", sw.grid_k)->delimiter(',');
  sc->add_option("--grid-sigma", sw.grid_sigma)->delimiter(',');
  sc->add_option("--grid-temp", sw.grid_temp)->delimiter(',');
  sc->add_option("--grid-n-probe", sw.grid_n_probe)->delimiter(',');
  sc->add_option("--top-m", sw.top_m);
  sc->add_option("--out", sw.out);
  sc->add_option("--threads", sw.threads)->check(CLI::PositiveNumber);
  sc->callback([&] { action = [&] { return RunSweep(sw, out); }; });

  TheorySimOptions ts;
  sc = app.add_subcommand("theory-sim", "Monte-Carlo risk curves for linear ResMem");
  sc->add_option("--d", ts.d)->check(CLI::PositiveNumber);
  sc->add_option("--L", ts.L);
  sc->add_option("--n-grid", ts.n_grid)->delimiter(',');
  sc->add_option("--trials", ts.trials)->check(CLI::PositiveNumber);
  sc->add_option("--m-test", ts.m_test)->check(CLI::PositiveNumber);
  sc->add_option("--seed", ts.seed);
  sc->add_flag("--random-theta", ts.random_theta);
  sc->add_option("--out", ts.out);
  sc->add_option("--threads", ts.threads)->check(CLI::PositiveNumber);
  sc->callback([&] { action = [&] { return RunTheorySim(ts, out); }; });

  ZnnOptions zn;
  sc = app.add_subcommand("znn-check", "Nearest-neighbor distance concentration table");
  sc->add_option("--d", zn.d)->check(CLI::PositiveNumber);
  sc->add_option("--n-grid", zn.n_grid)->delimiter(',');
  sc->add_option("--trials", zn.trials)->check(CLI::PositiveNumber);
  sc->add_option("--seed", zn.seed);
  sc->add_option("--out", zn.out);
  sc->add_option("--threads", zn.threads)->check(CLI::PositiveNumber);
  sc->callback([&] { action = [&] { return RunZnnCheck(zn, out); }; });

  RateFitOptions rf;
  sc = app.add_subcommand("rate-fit", "Log-log slope of a table column against n");
  sc->add_option("--in", rf.in)->required();
  sc->add_option("--field", rf.field);
  sc->callback([&] { action = [&] { return RunRateFit(rf, out); }; });

  if (args.empty()) {
    err << app.help();
    return kExitUsage;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  if (!action) {
    err << app.help();
    return kExitUsage;
  }
  try {
    return action();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace resmem
