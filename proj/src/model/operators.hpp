#pragma once

#include "model/system.hpp"

namespace stochsym::model {

// Sum over k of e_{w_k w_k} + s^j_k s^l_k e_{x_j x_l} + 2 s^j_k e_{x_j w_k}.
Expression ito_laplacian(const System& sys, const Expression& e);

// [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i, derivatives in x only.
VectorField commutator(const VectorField& X, const VectorField& Y);

// Scalar systems only (n = m = 1); Error(Dimension) otherwise.
// L e = e_t + (f - s s_x / 2) e_x,  M e = e_w + s e_x.
Expression operator_L(const System& sys, const Expression& e);
Expression operator_M(const System& sys, const Expression& e);

}  // namespace stochsym::model
