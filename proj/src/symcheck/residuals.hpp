#pragma once

#include "model/system.hpp"
#include "symcheck/report.hpp"

namespace stochsym::symcheck {

// Raw determining-equation residuals, drift rows first then one per (i, k).
//   drift[i]:   phi^i_t + f^j d_j phi^i - phi^j d_j f^i + Delta(phi^i)/2
//   diff[i,k]:  [d_{w_k} phi^i] + s^j_k d_j phi^i - phi^j d_j s^i_k
// The bracketed term is present only when `random` is set.
std::vector<Expression> residual_expressions(const model::System& sys, const model::VectorField& X,
                                             bool random);
std::vector<std::string> residual_labels(const model::System& sys);

// Throws Error(Invariant) if X depends on w.
ResidualReport deterministic_residuals(const model::System& sys, const model::VectorField& X,
                                       const CheckOptions& opts = {});
ResidualReport random_residuals(const model::System& sys, const model::VectorField& X,
                                const CheckOptions& opts = {});

}  // namespace stochsym::symcheck
