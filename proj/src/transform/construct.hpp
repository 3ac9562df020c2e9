#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "model/system.hpp"
#include "symcheck/report.hpp"
#include "transform/change_of_variables.hpp"

namespace stochsym::transform {

// Xi = int dy / phi for a scalar symmetry coefficient phi (additive term 0).
// Rule-based antiderivative when one exists, with a symbolic inverse from the
// pattern table when it verifies; otherwise a numeric map (quadrature from the
// midpoint of the y box, bracketed root finding for the inverse).
// Throws Error(ZeroCoefficient) if phi vanishes on the domain.
ChangeOfVariables build_phi_from_symmetry(const model::System& sys, const Expression& phi);

struct BetaOptions {
  double c = 0.0;                        // coefficient of w in B
  Expression b = expr::constant(0.0);    // b(t)
  bool force_grid = false;
};

// Additive term B(t, w) making Xi + B carry the system to w-free coefficients.
//   beta_w = psi_w + S psi_y,
//   beta_t = psi_t + F psi_y + (S psi_yw + S^2 psi_yy) / 2,
//   B = b(t) + c w - int_0^w beta dv.
struct BetaResult {
  std::optional<Expression> beta;  // beta(t, w) when integrated symbolically
  std::optional<Expression> B;
  std::shared_ptr<const AdditiveTerm> additive;
  Expression rhs_w;
  Expression rhs_t;
  std::vector<std::string> notes;

  bool symbolic() const { return B.has_value(); }
};

// psi = Xi_w. F, S are the drift and diffusion of the scalar system.
// Throws Error(BetaYDependence) when the right-hand sides depend on y at the
// sample points, Error(CompatibilityFailed) when beta_tw != beta_wt.
BetaResult solve_beta(const Expression& F, const Expression& S, const Expression& psi,
                      const model::Domain& domain, const BetaOptions& opts = {});

// Same, taking psi from a map returned by build_phi_from_symmetry. For a
// quadrature map the right-hand sides are read at y = y0, where psi vanishes.
BetaResult solve_beta(const model::System& sys, const ChangeOfVariables& xi, const BetaOptions& opts = {});

ChangeOfVariables with_beta(const ChangeOfVariables& xi, const BetaResult& beta, const model::Interval& y_box);

// X^i -> (dPhi^i/dy^j) phi^j in the new coordinates. Needs a symbolic map.
model::VectorField push_forward(const model::VectorField& X, const ChangeOfVariables& cov);

// Residuals of the pushed-forward field on the transformed system.
symcheck::ResidualReport verify_preservation(const model::System& sys, const model::VectorField& X,
                                             const ChangeOfVariables& cov,
                                             const symcheck::CheckOptions& opts = {});

}  // namespace stochsym::transform
