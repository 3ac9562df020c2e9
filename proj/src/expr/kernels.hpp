#pragma once

#include <cmath>
#include <limits>

#include "expr/expression.hpp"

namespace stochsym::expr::detail {

// Numeric kernels shared by folding, tree evaluation and compiled evaluation,
// so every path produces the same bits. NaN signals a singular operation.
inline double apply_unary(Op op, double a) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  switch (op) {
    case Op::Neg: return -a;
    case Op::Exp: return std::exp(a);
    case Op::Log: return a > 0.0 ? std::log(a) : nan;
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Sqrt: return a >= 0.0 ? std::sqrt(a) : nan;
    default: return nan;
  }
}

inline double apply_binary(Op op, double a, double b) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return b != 0.0 ? a / b : nan;
    case Op::Pow:
      if (a < 0.0 && std::trunc(b) != b) return nan;
      if (a == 0.0 && b < 0.0) return nan;
      return std::pow(a, b);
    default: return nan;
  }
}

}  // namespace stochsym::expr::detail
