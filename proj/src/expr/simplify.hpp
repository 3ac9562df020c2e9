#pragma once

#include "expr/expression.hpp"

namespace stochsym::expr {

// Rewrites e into a sum of monomials: constant folding, flattening, like-term
// and like-factor merging, exp(a)*exp(b) -> exp(a+b), log(exp(a)) -> a,
// exp(log(a)) -> a, distribution of products over sums while the expansion
// stays small. Applied to a fixpoint, so simplify(simplify(e)) is
// structurally simplify(e). Values are preserved wherever e is defined.
Expression simplify(const Expression& e);

}  // namespace stochsym::expr
