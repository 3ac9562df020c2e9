#pragma once

#include <optional>

#include "expr/expression.hpp"

namespace stochsym::expr {

// Antiderivative of e with respect to v from a small rule table: linearity,
// constants, power rule, exp/sin/cos of g, and one level of u-substitution
// c*g'(v)*h(g(v)) with h a power, exp, sin or cos. 1/g integrates to
// log(g^2)/2, i.e. log|g|.
//
// A returned result has been checked: d/dv of it matches e at sampled points
// (relative residual < 1e-9). nullopt means no rule applied.
std::optional<Expression> integrate_rule_based(const Expression& e, Variable v);

}  // namespace stochsym::expr
