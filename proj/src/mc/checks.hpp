#pragma once

#include <string>
#include <vector>

#include "mc/ensemble.hpp"
#include "model/system.hpp"
#include "transform/change_of_variables.hpp"

namespace stochsym::mc {

// Law of x(T) for dx = f(t) dt + s(t) dw (scalar, Gaussian):
//   mean = x0 + int_{t0}^T f,  variance = int_{t0}^T s^2.
class ExactLaw {
 public:
  // f and s may reference t only. Throws Error(Invariant) otherwise.
  ExactLaw(expr::Expression f, expr::Expression s, double x0, double t0 = 0.0);
  double mean(double T) const;
  double variance(double T) const;

 private:
  expr::Expression f_;
  expr::Expression s2_;
  double x0_;
  double t0_;
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
  int samples = 0;
};

// One-sample Kolmogorov-Smirnov test against Normal(mean, variance), with the
// asymptotic p-value Q(sqrt(N) D), Q(l) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 l^2}.
KsResult ks_normal(std::vector<double> samples, double mean, double variance);

struct LawReport {
  KsResult ks;
  double mean = 0.0;
  double variance = 0.0;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  double alpha = 0.01;
  bool pass = false;
};

// Final states of the completed paths against the exact law at the grid end.
// Throws Error(TooFewPaths) below `min_paths` completed paths.
LawReport law_check(const PathEnsemble& ens, const ExactLaw& law, int min_paths = 1000, double alpha = 0.01);

struct PathwiseOptions {
  std::vector<double> dts{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  double T = 1.0;
  double t0 = 0.0;
  int paths = 1000;
  std::uint64_t seed = 42;
  double factor = 1.2;      // required median ratio per halving
  double final_tol = 1e-2;  // median at the smallest dt
  SimOptions sim;
};

struct PathwiseLevel {
  double dt = 0.0;
  double median = 0.0;
  double p95 = 0.0;
  int used = 0;  // paths where both trajectories completed
};

struct PathwiseReport {
  std::vector<PathwiseLevel> levels;
  double min_factor = 0.0;
  bool monotone = false;
  bool pass = false;
  std::vector<std::string> notes;
};

// Simulates the original system from y0 and the transformed one from
// x0 = Phi(y0, t0, 0) with identical increments; per path the error is
// sup_k |Phi(y_k, t_k, w_k) - x_k|, w_k the running sum of increments.
PathwiseReport pathwise_check(const model::CoefficientModel& original, const transform::ChangeOfVariables& cov,
                              const model::CoefficientModel& reduced, const std::vector<double>& y0,
                              const PathwiseOptions& opts = {});

}  // namespace stochsym::mc
