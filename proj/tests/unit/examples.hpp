#pragma once

#include "test_support.hpp"

namespace stochsym::testing {

// dy = (e^-y - e^-2y / 2) dt + e^-y dw
inline model::System example1() { return scalar_system("exp(-x1) - exp(-2*x1)/2", "exp(-x1)"); }

inline model::System example2() {
  return scalar_system("exp(-t)*(1+x1^2)^2/(8*x1^3)*(-4*x1^2 + exp(t)*(3*x1^4 + 2*x1^2 - 1))",
                       "-(1+x1^2)^2/(2*x1)", 0.2, 2.0);
}

inline model::System example3() {
  const expr::VariableSpace sp(2, 2);
  auto d = model::Domain::defaults(2, 2);
  d.x = {{-1.0, 1.0}, {-1.0, 1.0}};
  return model::System::ito(sp,
                            {P("exp(x1) - exp(-2*x1)/2", 2, 2),
                             P("exp(x2)*(2*exp(x1) + exp(x2) + exp(2*x1+x2))/2", 2, 2)},
                            {{P("exp(-x1)", 2, 2), P("0", 2, 2)}, {P("-exp(x1+x2)", 2, 2), P("-exp(x2)", 2, 2)}},
                            d);
}

// dy = (a + b y) dt + s dw, a = (0.3, -0.2), b = diag(0.5, -0.3).
inline model::System example4() {
  const expr::VariableSpace sp(2, 2);
  return model::System::ito(sp, {P("0.3 + 0.5*x1", 2, 2), P("-0.2 - 0.3*x2", 2, 2)},
                            {{P("1", 2, 2), P("0.4", 2, 2)}, {P("0.2", 2, 2), P("0.8", 2, 2)}},
                            model::Domain::defaults(2, 2));
}

// k = 1
inline model::System example5() { return scalar_system("t^2*exp(-t)/2 - x1", "(t+1)*exp(-t)"); }

inline model::System example6() {
  auto d = model::Domain::defaults(1, 1);
  d.x[0] = {0.1, 2.0};
  d.w[0] = {-1.0, 1.0};
  return model::System::ito(expr::VariableSpace(1, 1), {P("-(exp(-x1) + exp(-2*x1)/2)")}, {{P("exp(-x1)")}}, d);
}

inline model::System example7() { return scalar_system("x1", "x1", 0.1, 2.1); }

inline model::System example8() { return scalar_system("1", "x1"); }

}  // namespace stochsym::testing
