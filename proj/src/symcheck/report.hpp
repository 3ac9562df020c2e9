#pragma once

#include <map>
#include <string>
#include <vector>

#include "expr/expression.hpp"
#include "model/system.hpp"

namespace stochsym::symcheck {

using expr::Expression;

struct CheckOptions {
  double tol = 1e-8;
  int points = 200;
};

struct ResidualEntry {
  std::string label;    // e.g. "det[1]", "diff[1,2]"
  Expression residual;  // simplified, for inspection
  double max_abs = 0.0;
};

// verdict: pass <=> max_residual < tol * scale.
struct ResidualReport {
  std::string check;
  std::vector<ResidualEntry> entries;
  double max_residual = 0.0;
  double scale = 1.0;
  double tol = 1e-8;
  int points = 0;
  bool pass = false;
  std::map<std::string, double> values;  // extra numbers (fitted constants, ...)
  std::vector<std::string> notes;
};

// Samples `residuals` (evaluated as given) and `scale_exprs` at up to
// opts.points points of the domain and fills max_abs, max_residual, scale
// (1 + max |scale_exprs|) and the verdict. Labels and display forms are taken
// from `entries`, which must align with `residuals`.
// Throws Error(DegenerateSampling) when no valid point exists.
void sample_and_judge(ResidualReport& report, const std::vector<Expression>& residuals,
                      const std::vector<Expression>& scale_exprs, const expr::VariableSpace& space,
                      const model::Domain& domain, const CheckOptions& opts,
                      const std::vector<Expression>& extra_watch = {});

}  // namespace stochsym::symcheck
