#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mc/ensemble.hpp"
#include "model/coefficients.hpp"
#include "model/system.hpp"
#include "symcheck/report.hpp"
#include "transform/change_of_variables.hpp"
#include "transform/construct.hpp"

namespace stochsym::reduce {

using expr::Expression;

// dx = f(t) dt + sigma(t) dw. The antiderivatives in t of f and sigma^2 are
// kept when the rule-based integrator finds them:
//   E x(t) = x0 + [F]_{t0}^t,  Var x(t) = [V]_{t0}^t.
struct IntegrableScalarForm {
  Expression f;
  Expression sigma;
  std::optional<Expression> drift_integral;
  std::optional<Expression> variance_integral;
};

// dx^i = g^i dt + rho^i_k dw^k with g, rho functions of x^1..x^{i-1} and t.
struct Reconstruction {
  int index = 0;  // 1-based, in the final coordinates
  Expression drift;
  std::vector<Expression> diffusion;
};

struct Stage {
  std::string generator;
  transform::ChangeOfVariables cov;    // acts on the first cov.n() coordinates
  std::optional<model::System> system;  // transformed block, y^n already dropped from its coefficients
  std::vector<symcheck::ResidualReport> checks;
};

struct ReductionResult {
  int n = 0;
  int m = 0;
  std::vector<Stage> stages;
  std::optional<model::System> reduced;         // absent when nothing is left to solve
  std::vector<Reconstruction> reconstruction;  // ascending index, which is the integration order
  std::optional<model::System> full;            // reduced block plus reconstruction, final coordinates
  transform::ChangeOfVariables total;           // original -> final coordinates
  std::shared_ptr<const model::CoefficientModel> coefficients;  // full system, numerically
  bool integrable = false;
  std::optional<IntegrableScalarForm> form;
  std::vector<std::string> notes;

  int reduced_dimension() const { return reduced ? reduced->n() : 0; }
};

struct ReduceOptions {
  symcheck::CheckOptions check;
  transform::BetaOptions beta;
};

// Scalar Ito system and a (deterministic or random) symmetry X = phi d/dx.
// Throws Error(Invariant) if X fails the determining equations,
// Error(CompatibilityFailed) for a random X failing the compatibility
// condition, Error(NonIntegrable) if the transformed coefficients still
// depend on x or w.
ReductionResult integrate_scalar(const model::System& sys, const model::VectorField& X,
                                 const ReduceOptions& opts = {});

// One reduction step with user-supplied coordinates in which X = d/dy^n.
// Throws Error(CovMismatch) if the map does not straighten X and
// Error(StageFailure) if X is not a symmetry or the coefficients keep a
// y^n dependence. n = m = 1 delegates to integrate_scalar (the map is unused).
ReductionResult reduce_once(const model::System& sys, const model::VectorField& X,
                            const transform::ChangeOfVariables& cov, const ReduceOptions& opts = {});

// covs[s] is the map of stage s, on n - s coordinates. Generators are consumed
// from the last one in the chain to the first; the ones left are pushed
// through each map, checked on the transformed system and projected onto the
// reduced block. Throws Error(StageFailure) naming the stage and the check.
ReductionResult reduce_chain(const model::System& sys, const model::SolvableChain& chain,
                             const std::vector<transform::ChangeOfVariables>& covs,
                             const ReduceOptions& opts = {});

// dx = beta(x) f(t) dt + beta(x) sigma(t) dw has the simple symmetry x d/dx
// only when beta = b0 x; x = e^y then gives
//   dy = (b0 f - b0^2 sigma^2 / 2) dt + b0 sigma dw.
struct SeparableForm {
  model::VectorField X;
  transform::ChangeOfVariables cov;
  double b0 = 1.0;
  IntegrableScalarForm form;
};

// beta must depend on x1 only and f, sigma on t only, else nullopt.
// Proportionality is sampled on `x_box` with relative tolerance 1e-8.
std::optional<SeparableForm> separable_detect(const Expression& beta, const Expression& f,
                                              const Expression& sigma,
                                              const model::Interval& x_box = {0.1, 2.0});

// Fills the reconstructed coordinates along each reduced path with
// left-point sums driven by the stored increments; `initial` holds their
// values at t0, in ascending index. Throws Error(IncrementMismatch) if the
// paths carry no increments for the result's m.
mc::PathEnsemble reconstruct(const ReductionResult& result, const mc::PathEnsemble& reduced_paths,
                             const std::vector<double>& initial, const mc::SimOptions& opts = {});

}  // namespace stochsym::reduce
