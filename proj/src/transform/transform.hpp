#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "model/coefficients.hpp"
#include "model/system.hpp"
#include "transform/change_of_variables.hpp"

namespace stochsym::transform {

// A transformed equation. `system` is present when the coefficients have a
// closed form; `coefficients` is always usable numerically (Monte Carlo).
struct TransformResult {
  std::optional<model::System> system;
  std::shared_ptr<const model::CoefficientModel> coefficients;
  model::Domain domain;  // box of the new coordinates
  std::vector<std::string> notes;

  bool symbolic() const { return system.has_value(); }
};

enum class Direction {
  // Ito rule applied to the forward map, then old = inverse(new).
  Forward,
  // Coefficients solved from old = inverse(new):
  //   S = (s(G) - G_w) / G_y,  F = (f(G) - G_t - Delta G / 2) / G_y.
  Backward,
};

// Scalar (n = m = 1) system, deterministic or random map. The result is an
// Ito system when its simplified coefficients are free of w, a generalized
// one otherwise. Without a symbolic inverse the result is numeric only.
// Throws Error(Monotonicity) if Phi_y vanishes or changes sign.
TransformResult transform_scalar(const model::System& sys, const ChangeOfVariables& cov,
                                 Direction direction = Direction::Forward);

// General n. With forward and inverse the Ito rule is applied and then, for
// n <= 3, cross-checked at sample points against the cofactor solution of
// the inverse-map relations. With only an inverse, n <= 3 uses the cofactor
// solution and n > 3 a numeric per-point linear solve. Throws
// Error(SingularJacobian) when sampled |det dPhi/dy| <= 1e-6.
TransformResult transform_system(const model::System& sys, const ChangeOfVariables& cov);

// Symbolic inverse of a square matrix by cofactors (n <= 3).
std::vector<std::vector<Expression>> cofactor_inverse(const std::vector<std::vector<Expression>>& J);
Expression determinant(const std::vector<std::vector<Expression>>& J);

}  // namespace stochsym::transform
