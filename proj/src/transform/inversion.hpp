#pragma once

#include <optional>

#include "model/system.hpp"

namespace stochsym::transform {

using expr::Expression;

// Solves x1_new = g(x1_old, t, w) for x1_old. Outer operations with one
// y-free operand are peeled off; what remains is matched against a small
// pattern table: linear or quadratic in y, linear or quadratic in e^{ky},
// and Moebius (a y + b)/(c y + d). Branches (even powers, quadratic roots)
// are chosen from the sign pattern on `domain`. Every candidate is checked
// by a sampled round trip; nullopt when nothing verifies.
std::optional<Expression> invert_scalar(const Expression& g, const model::Domain& domain);

}  // namespace stochsym::transform
