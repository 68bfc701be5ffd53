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

#include "resmem/theory.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "resmem/error.h"
#include "resmem/parallel.h"

namespace resmem::theory {
namespace {

Eigen::VectorXd RidgeSolve(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& b,
                           double lambda) {
  const Eigen::MatrixXd A =
      sigma + lambda * Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularSystem, "LDLT failed at lambda=" + std::to_string(lambda));
  }
  Eigen::VectorXd theta = ldlt.solve(b);
  if (!theta.allFinite()) {
    throw Error(ErrorCode::kSingularSystem, "non-finite solve at lambda=" + std::to_string(lambda));
  }
  return theta;
}

constexpr std::uint64_t kThetaStream = ~std::uint64_t{0};

}  // namespace

LinearProblem LinearProblem::Make(std::uint64_t d, double L, std::uint64_t seed,
                                  bool random_direction) {
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "d must be >= 1");
  if (!(L > 0.0 && L < 1.0)) throw Error(ErrorCode::kInvalidArgument, "L must lie in (0, 1)");
  LinearProblem prob;
  prob.d = d;
  prob.L = L;
  prob.seed = seed;
  prob.theta_star = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  if (random_direction) {
    Rng rng = Substream(seed, {kThetaStream});
    std::normal_distribution<double> normal;
    do {
      for (Eigen::Index i = 0; i < prob.theta_star.size(); ++i) prob.theta_star(i) = normal(rng);
    } while (prob.theta_star.norm() == 0.0);
    prob.theta_star.normalize();
  } else {
    prob.theta_star(0) = 1.0;
  }
  return prob;
}

Eigen::MatrixXd SampleBall(std::uint64_t count, std::uint64_t d, Rng& rng) {
  if (count < 1 || d < 1) throw Error(ErrorCode::kInvalidArgument, "need count, d >= 1");
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double radius = std::sqrt(static_cast<double>(d) + 2.0);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double norm = 0.0;
    do {
      for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = normal(rng);
      norm = X.row(i).norm();
    } while (norm == 0.0);
    const double r = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(d));
    X.row(i) *= r / norm;
  }
  return X;
}

ErmSolution SolveConstrainedErm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double L,
                                double tol) {
  if (X.rows() < 1 || X.cols() < 1) throw Error(ErrorCode::kInvalidArgument, "empty design");
  if (y.size() != X.rows()) throw Error(ErrorCode::kShapeMismatch, "y length != rows of X");
  if (!(L > 0.0)) throw Error(ErrorCode::kInvalidArgument, "L must be > 0");
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tol must be > 0");
  if (!X.allFinite() || !y.allFinite()) {
    throw Error(ErrorCode::kNonFiniteValue, "non-finite regression data");
  }

  ErmSolution sol;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
  sol.theta = cod.solve(y);
  if (!sol.theta.allFinite()) throw Error(ErrorCode::kSingularSystem, "least squares failed");
  if (sol.theta.norm() <= L) return sol;

  const double inv_n = 1.0 / static_cast<double>(X.rows());
  const Eigen::MatrixXd sigma = (X.transpose() * X) * inv_n;
  const Eigen::VectorXd b = (X.transpose() * y) * inv_n;

  // |theta(lambda)| is strictly decreasing in lambda.
  double lo = 0.0;
  double hi = 1.0;
  Eigen::VectorXd theta = RidgeSolve(sigma, b, hi);
  while (theta.norm() >= L) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw Error(ErrorCode::kSingularSystem, "lambda bracket diverged");
    theta = RidgeSolve(sigma, b, hi);
  }
  double lambda = hi;
  for (int iter = 0; iter < 2000 && std::abs(theta.norm() - L) > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    lambda = mid;
    theta = RidgeSolve(sigma, b, lambda);
    if (theta.norm() > L) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::abs(theta.norm() - L) > std::max(tol, 1e-8)) {
    throw Error(ErrorCode::kSingularSystem, "lambda bisection did not reach the constraint");
  }
  sol.theta = std::move(theta);
  sol.lambda = lambda;
  sol.active = true;
  return sol;
}

double ErmObjective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& theta) {
  return (X * theta - y).squaredNorm() / static_cast<double>(X.rows());
}

double KktResidual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ErmSolution& sol) {
  const double inv_n = 1.0 / static_cast<double>(X.rows());
  const Eigen::VectorXd lhs =
      (X.transpose() * (X * sol.theta)) * inv_n + sol.lambda * sol.theta;
  return (lhs - (X.transpose() * y) * inv_n).norm();
}

std::uint64_t NearestIndex(const Eigen::MatrixXd& X, const Eigen::VectorXd& query) {
  if (X.rows() < 1) throw Error(ErrorCode::kInvalidArgument, "no rows to search");
  std::uint64_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double dist = (X.row(i).transpose() - query).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<std::uint64_t>(i);
    }
  }
  return best;
}

double PredictResMemLinear(const Eigen::VectorXd& query, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& y, const ErmSolution& sol) {
  const auto nn = static_cast<Eigen::Index>(NearestIndex(X, query));
  return query.dot(sol.theta) + (y(nn) - X.row(nn).dot(sol.theta));
}

RiskSample RunTrial(const LinearProblem& prob, std::uint64_t n, std::uint64_t m_test, Rng& rng) {
  if (n < 1 || m_test < 1) throw Error(ErrorCode::kInvalidArgument, "need n, m_test >= 1");
  const Eigen::MatrixXd X = SampleBall(n, prob.d, rng);
  const Eigen::VectorXd y = X * prob.theta_star;
  const ErmSolution sol = SolveConstrainedErm(X, y, prob.L);
  const Eigen::MatrixXd tests = SampleBall(m_test, prob.d, rng);

  const Eigen::VectorXd theta_inf = prob.L * prob.theta_star;
  const Eigen::VectorXd est_err = sol.theta - theta_inf;        // f_n - f_inf
  const Eigen::VectorXd perp = theta_inf - prob.theta_star;     // f_inf - f_star
  const Eigen::VectorXd fit_err = sol.theta - prob.theta_star;  // f_n - f_star

  RiskSample out;
  for (Eigen::Index t = 0; t < tests.rows(); ++t) {
    const Eigen::VectorXd xt = tests.row(t).transpose();
    const auto nn = static_cast<Eigen::Index>(NearestIndex(X, xt));
    const Eigen::VectorXd xn = X.row(nn).transpose();

    const double resmem = xt.dot(sol.theta) + (y(nn) - xn.dot(sol.theta));
    const double total = std::pow(resmem - xt.dot(prob.theta_star), 2);
    const double a = xt.dot(est_err);
    const double b = xn.dot(est_err);
    const double c = xt.dot(perp) - xn.dot(perp);
    const double t1 = a * a + b * b;
    const double t2 = c * c;
    if (total > 3.0 * (t1 + t2) * (1.0 + 1e-12) + 1e-300) ++out.decomposition_violations;

    out.total += total;
    out.t1 += t1;
    out.t2 += t2;
    out.erm_only += std::pow(xt.dot(fit_err), 2);
    out.pure_nn += std::pow(y(nn) - xt.dot(prob.theta_star), 2);
  }
  const double inv_m = 1.0 / static_cast<double>(m_test);
  out.total *= inv_m;
  out.t1 *= inv_m;
  out.t2 *= inv_m;
  out.erm_only *= inv_m;
  out.pure_nn *= inv_m;
  return out;
}

MeanSe Summarize(std::span<const double> values) {
  MeanSe out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double count = static_cast<double>(values.size());
  out.mean = sum / count;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / (count - 1.0) / count);
  }
  return out;
}

RiskField ParseRiskField(const std::string& name) {
  if (name == "total") return RiskField::kTotal;
  if (name == "t1") return RiskField::kT1;
  if (name == "t2") return RiskField::kT2;
  if (name == "erm" || name == "erm_only") return RiskField::kErmOnly;
  if (name == "nn" || name == "pure_nn") return RiskField::kPureNn;
  throw Error(ErrorCode::kInvalidArgument, "unknown risk field '" + name + "'");
}

const MeanSe& RiskRow::field(RiskField f) const {
  switch (f) {
    case RiskField::kTotal: return total;
    case RiskField::kT1: return t1;
    case RiskField::kT2: return t2;
    case RiskField::kErmOnly: return erm_only;
    case RiskField::kPureNn: return pure_nn;
  }
  return total;
}

RiskTable RiskCurve(const LinearProblem& prob, std::span<const std::uint64_t> n_grid,
                    std::uint64_t trials, std::uint64_t m_test, int threads) {
  if (n_grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty n grid");
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument, "n grid must be strictly ascending");
    }
  }
  RiskTable table;
  for (std::uint64_t n : n_grid) {
    std::vector<RiskSample> samples(trials);
    ParallelFor(trials, threads, [&](std::size_t t) {
      Rng rng = Substream(prob.seed, {n, t});
      samples[t] = RunTrial(prob, n, m_test, rng);
    });
    auto collect = [&](double RiskSample::*member) {
      std::vector<double> v;
      v.reserve(samples.size());
      for (const auto& s : samples) v.push_back(s.*member);
      return Summarize(v);
    };
    RiskRow row;
    row.n = n;
    row.total = collect(&RiskSample::total);
    row.t1 = collect(&RiskSample::t1);
    row.t2 = collect(&RiskSample::t2);
    row.erm_only = collect(&RiskSample::erm_only);
    row.pure_nn = collect(&RiskSample::pure_nn);
    for (const auto& s : samples) row.decomposition_violations += s.decomposition_violations;
    table.rows.push_back(row);
  }
  return table;
}

double RateFit(std::span<const double> n, std::span<const double> mean) {
  if (n.size() != mean.size()) throw Error(ErrorCode::kInvalidArgument, "length mismatch");
  if (n.size() < 3) throw Error(ErrorCode::kInvalidArgument, "rate fit needs >= 3 rows");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(mean[i] > 0.0)) {
      throw Error(ErrorCode::kNonPositiveMean, "mean at n=" + std::to_string(n[i]) + " is not > 0");
    }
    if (!(n[i] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "n must be > 0");
    lx.push_back(std::log(n[i]));
    ly.push_back(std::log(mean[i]));
  }
  const double count = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= count;
  my /= count;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw Error(ErrorCode::kInvalidArgument, "rate fit needs distinct n values");
  return sxy / sxx;
}

double RateFit(const RiskTable& table, RiskField field) {
  std::vector<double> n, mean;
  for (const auto& row : table.rows) {
    n.push_back(static_cast<double>(row.n));
    mean.push_back(row.field(field).mean);
  }
  return RateFit(n, mean);
}

double ZnnBound(std::uint64_t d, std::uint64_t n) {
  const double dd = static_cast<double>(d);
  const double nn = static_cast<double>(n);
  return dd * dd * std::pow(std::log(nn) / dd / nn, 1.0 / dd);
}

std::vector<ZnnRow> ZnnConcentration(std::uint64_t d, std::span<const std::uint64_t> n_grid,
                                     std::uint64_t trials, std::uint64_t seed, int threads) {
  if (d < 1 || trials < 1) throw Error(ErrorCode::kInvalidArgument, "need d, trials >= 1");
  std::vector<ZnnRow> rows;
  for (std::uint64_t n : n_grid) {
    if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
    std::vector<double> z(trials);
    ParallelFor(trials, threads, [&](std::size_t t) {
      Rng rng = Substream(seed, {n, t});
      const Eigen::MatrixXd X = SampleBall(n, d, rng);
      const Eigen::MatrixXd query = SampleBall(1, d, rng);
      z[t] = (X.rowwise() - query.row(0)).rowwise().squaredNorm().minCoeff();
    });
    ZnnRow row;
    row.n = n;
    row.zn = Summarize(z);
    row.bound = n >= 2 ? ZnnBound(d, n) : 0.0;
    row.ratio = n >= 2 ? row.zn.mean / row.bound : std::numeric_limits<double>::infinity();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace resmem::theory
