#pragma once

#include "model/system.hpp"
#include "symcheck/report.hpp"

namespace stochsym::symcheck {

// For each k and a < k, fits constants c with [X_a, X_k] = sum_{b<k} c_b X_b
// by least squares over sample points of `domain`. Passes iff every fit
// residual is below tol * (1 + max |bracket|). Pointwise linear independence
// of the generators (the only checkable part of the regular-orbit
// hypothesis) is reported separately as values["independent"] and is
// enforced by reduce_chain, not here. Fitted constants are reported as
// values "c[a,k;b]" (1-based). Throws Error(Unsupported) for random fields.
ResidualReport check_solvable_chain(const model::SolvableChain& chain,
                                    const expr::VariableSpace& space, const model::Domain& domain,
                                    const CheckOptions& opts = {});

}  // namespace stochsym::symcheck
