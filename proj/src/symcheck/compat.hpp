#pragma once

#include "model/system.hpp"
#include "symcheck/report.hpp"

namespace stochsym::symcheck {

// gamma = d_w(1/phi);
// residual = S gamma_t + S_t gamma - F gamma_w - (S gamma_ww + S^2 gamma_yw)/2.
Expression compatibility_residual(const model::System& sys, const Expression& phi);

// Scalar Ito system only. Pass means a simple random map to an integrable
// Ito equation exists. Throws Error(ZeroCoefficient) if phi vanishes or
// changes sign on the domain. Scale is 1 + max |gamma|.
ResidualReport compatibility_check(const model::System& sys, const Expression& phi,
                                   const CheckOptions& opts = {});

struct KernelMembership {
  bool in_ker_L = false;
  bool in_ker_M = false;
  ResidualReport L;
  ResidualReport M;
};

// Scale is 1 + max |psi|.
KernelMembership kernel_membership(const model::System& sys, const Expression& psi,
                                   const CheckOptions& opts = {});

// Sampled check that e keeps one strict sign on the domain.
// Throws Error(ZeroCoefficient) naming `what` otherwise.
void require_nonvanishing(const model::System& sys, const Expression& e, const std::string& what,
                          int points = 200);

}  // namespace stochsym::symcheck
