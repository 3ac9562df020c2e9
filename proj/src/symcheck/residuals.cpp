#include "symcheck/residuals.hpp"

#include "common/error.hpp"
#include "expr/simplify.hpp"
#include "model/operators.hpp"

namespace stochsym::symcheck {

using expr::constant;
using expr::differentiate;
using expr::Variable;

namespace {

void require_dimensions(const model::System& sys, const model::VectorField& X) {
  if (X.n() != sys.n()) {
    throw Error(ErrorCode::Dimension, "vector field has " + std::to_string(X.n()) +
                                          " components, system has n=" + std::to_string(sys.n()));
  }
}

ResidualReport run(const std::string& name, const model::System& sys, const model::VectorField& X,
                   bool random, const CheckOptions& opts) {
  require_dimensions(sys, X);
  ResidualReport report;
  report.check = name;
  const auto raw = residual_expressions(sys, X, random);
  const auto labels = residual_labels(sys);
  for (std::size_t j = 0; j < raw.size(); ++j) {
    report.entries.push_back({labels[j], expr::simplify(raw[j]), 0.0});
  }
  // phi itself is watched so points where it is singular are skipped.
  sample_and_judge(report, raw, X.coeffs, sys.space(), sys.domain(), opts, sys.coefficients());
  return report;
}

}  // namespace

std::vector<Expression> residual_expressions(const model::System& sys, const model::VectorField& X,
                                             bool random) {
  require_dimensions(sys, X);
  const int n = sys.n();
  const int m = sys.m();
  std::vector<Expression> out;
  for (int i = 0; i < n; ++i) {
    const Expression& phi = X.coeffs[i];
    Expression r = differentiate(phi, Variable::time());
    for (int j = 0; j < n; ++j) {
      const Variable xj = Variable::x(j + 1);
      r = r + sys.drift(j) * differentiate(phi, xj) - X.coeffs[j] * differentiate(sys.drift(i), xj);
    }
    r = r + constant(0.5) * model::ito_laplacian(sys, phi);
    out.push_back(r);
  }
  for (int i = 0; i < n; ++i) {
    const Expression& phi = X.coeffs[i];
    for (int k = 0; k < m; ++k) {
      Expression r = random ? differentiate(phi, Variable::w(k + 1)) : constant(0.0);
      for (int j = 0; j < n; ++j) {
        const Variable xj = Variable::x(j + 1);
        r = r + sys.diffusion(j, k) * differentiate(phi, xj) -
            X.coeffs[j] * differentiate(sys.diffusion(i, k), xj);
      }
      out.push_back(r);
    }
  }
  return out;
}

std::vector<std::string> residual_labels(const model::System& sys) {
  std::vector<std::string> labels;
  for (int i = 1; i <= sys.n(); ++i) labels.push_back("drift[" + std::to_string(i) + "]");
  for (int i = 1; i <= sys.n(); ++i) {
    for (int k = 1; k <= sys.m(); ++k) {
      labels.push_back("diffusion[" + std::to_string(i) + "," + std::to_string(k) + "]");
    }
  }
  return labels;
}

ResidualReport deterministic_residuals(const model::System& sys, const model::VectorField& X,
                                       const CheckOptions& opts) {
  if (X.random()) {
    throw Error(ErrorCode::Invariant,
                "symmetry depends on w; use the random determining equations");
  }
  return run("deterministic-residuals", sys, X, false, opts);
}

ResidualReport random_residuals(const model::System& sys, const model::VectorField& X,
                                const CheckOptions& opts) {
  return run("random-residuals", sys, X, true, opts);
}

}  // namespace stochsym::symcheck
