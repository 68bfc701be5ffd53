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

#ifndef RESMEM_THEORY_H_
#define RESMEM_THEORY_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resmem/rng.h"

// Monte-Carlo laboratory for residual memorization in linear regression:
// covariates uniform on the ball of radius sqrt(d + 2), a norm-constrained
// least-squares fit, and a 1-NN correction of its residual.
namespace resmem::theory {

struct LinearProblem {
  std::uint64_t d = 2;
  double L = 0.5;             // constraint radius, 0 < L < 1
  Eigen::VectorXd theta_star;  // unit norm
  std::uint64_t seed = 0;

  // theta_star is e_1 unless random_direction is set, in which case it is a
  // uniformly random unit vector derived from seed.
  static LinearProblem Make(std::uint64_t d, double L, std::uint64_t seed,
                            bool random_direction = false);
};

// count x d matrix with i.i.d. rows uniform on the ball of radius sqrt(d+2):
// Gaussian direction, radius sqrt(d+2) * U^(1/d).
Eigen::MatrixXd SampleBall(std::uint64_t count, std::uint64_t d, Rng& rng);

struct ErmSolution {
  Eigen::VectorXd theta;
  double lambda = 0.0;
  bool active = false;
};

// argmin_{|theta| <= L} (1/n)|X theta - y|^2. When the minimum-norm
// least-squares solution is infeasible, bisects lambda so that
// theta(lambda) = (Sigma_n + lambda I)^{-1} X^T y / n has norm L within tol.
ErmSolution SolveConstrainedErm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double L,
                                double tol = 1e-10);

double ErmObjective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& theta);

// |(Sigma_n + lambda I) theta - X^T y / n|
double KktResidual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ErmSolution& sol);

// Row of X nearest to query, ties to the lowest index.
std::uint64_t NearestIndex(const Eigen::MatrixXd& X, const Eigen::VectorXd& query);

// <query, theta_n> + (y_nn - <x_nn, theta_n>)
double PredictResMemLinear(const Eigen::VectorXd& query, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& y, const ErmSolution& sol);

// Averages over the test draws of one trial.
struct RiskSample {
  double total = 0.0;     // (f_resmem - f_star)^2 at the test point
  double t1 = 0.0;        // (f_n - f_inf)^2 at the test point and at its neighbor
  double t2 = 0.0;        // neighbor gap of the part f_inf cannot represent
  double erm_only = 0.0;  // (f_n - f_star)^2
  double pure_nn = 0.0;   // (y_nn - f_star)^2
  // Test draws where total > 3 (t1 + t2) beyond round-off.
  std::uint64_t decomposition_violations = 0;
};

RiskSample RunTrial(const LinearProblem& prob, std::uint64_t n, std::uint64_t m_test, Rng& rng);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe Summarize(std::span<const double> values);

enum class RiskField { kTotal, kT1, kT2, kErmOnly, kPureNn };

// Accepts total, t1, t2, erm, nn.
RiskField ParseRiskField(const std::string& name);

struct RiskRow {
  std::uint64_t n = 0;
  MeanSe total, t1, t2, erm_only, pure_nn;
  std::uint64_t decomposition_violations = 0;

  const MeanSe& field(RiskField f) const;
};

struct RiskTable {
  std::vector<RiskRow> rows;  // ascending n
};

// Trial t at size n draws from Substream(prob.seed, {n, t}), so the table is
// independent of the thread count.
RiskTable RiskCurve(const LinearProblem& prob, std::span<const std::uint64_t> n_grid,
                    std::uint64_t trials, std::uint64_t m_test, int threads = 1);

// Least-squares slope of log(mean) against log(n). Needs >= 3 points.
double RateFit(std::span<const double> n, std::span<const double> mean);
double RateFit(const RiskTable& table, RiskField field);

// d^2 (log(n^(1/d)) / n)^(1/d)
double ZnnBound(std::uint64_t d, std::uint64_t n);

struct ZnnRow {
  std::uint64_t n = 0;
  MeanSe zn;
  double bound = 0.0;  // zero at n = 1
  double ratio = 0.0;  // zn.mean / bound; infinite at n = 1
};

// Z_n = min over n training draws of the squared distance to a fresh draw.
std::vector<ZnnRow> ZnnConcentration(std::uint64_t d, std::span<const std::uint64_t> n_grid,
                                     std::uint64_t trials, std::uint64_t seed, int threads = 1);

}  // namespace resmem::theory

#endif  // RESMEM_THEORY_H_
