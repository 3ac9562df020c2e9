#include "model/operators.hpp"

#include "common/error.hpp"
#include "expr/simplify.hpp"

namespace stochsym::model {

using expr::constant;
using expr::differentiate;
using expr::simplify;

Expression ito_laplacian(const System& sys, const Expression& e) {
  const int n = sys.n();
  const int m = sys.m();
  std::vector<Expression> grad(n);
  for (int j = 0; j < n; ++j) grad[j] = differentiate(e, Variable::x(j + 1));

  Expression acc = constant(0.0);
  for (int k = 0; k < m; ++k) {
    const Variable wk = Variable::w(k + 1);
    if (expr::depends_on(e, wk)) {
      acc = acc + differentiate(differentiate(e, wk), wk);
      for (int j = 0; j < n; ++j) {
        acc = acc + constant(2.0) * sys.diffusion(j, k) * differentiate(grad[j], wk);
      }
    }
    // s^j_k s^l_k e_{jl}, using symmetry of the Hessian.
    for (int j = 0; j < n; ++j) {
      if (sys.diffusion(j, k).is_constant(0.0)) continue;
      for (int l = j; l < n; ++l) {
        if (sys.diffusion(l, k).is_constant(0.0)) continue;
        Expression term = sys.diffusion(j, k) * sys.diffusion(l, k) *
                          differentiate(grad[j], Variable::x(l + 1));
        acc = acc + (l == j ? term : constant(2.0) * term);
      }
    }
  }
  return simplify(acc);
}

VectorField commutator(const VectorField& X, const VectorField& Y) {
  if (X.n() != Y.n()) throw Error(ErrorCode::Dimension, "commutator of fields of different dimension");
  VectorField out;
  for (int i = 0; i < X.n(); ++i) {
    Expression acc = constant(0.0);
    for (int j = 0; j < X.n(); ++j) {
      const Variable xj = Variable::x(j + 1);
      acc = acc + X.coeffs[j] * differentiate(Y.coeffs[i], xj) -
            Y.coeffs[j] * differentiate(X.coeffs[i], xj);
    }
    out.coeffs.push_back(simplify(acc));
  }
  return out;
}

namespace {

void require_scalar(const System& sys) {
  if (sys.n() != 1 || sys.m() != 1) {
    throw Error(ErrorCode::Dimension, "operators L and M need a scalar system (n = m = 1)");
  }
}

}  // namespace

Expression operator_L(const System& sys, const Expression& e) {
  require_scalar(sys);
  const Variable x = Variable::x(1);
  const Expression& f = sys.drift(0);
  const Expression& s = sys.diffusion(0, 0);
  Expression coeff = f - constant(0.5) * s * differentiate(s, x);
  return simplify(differentiate(e, Variable::time()) + coeff * differentiate(e, x));
}

Expression operator_M(const System& sys, const Expression& e) {
  require_scalar(sys);
  const Variable x = Variable::x(1);
  return simplify(differentiate(e, Variable::w(1)) + sys.diffusion(0, 0) * differentiate(e, x));
}

}  // namespace stochsym::model
