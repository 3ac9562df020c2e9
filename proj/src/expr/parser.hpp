#pragma once

#include <string_view>

#include "expr/expression.hpp"

namespace stochsym::expr {

// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' signed)?
//   signed := '-' signed | atom ('^' signed)?
//   atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
// `-x1^2` is -(x1^2). A minus directly in front of a bare NUMBER folds into a
// negative literal. Errors carry `line` and a column counted from `column0`.
Expression parse(std::string_view text, const VariableSpace& space, int line = 1,
                 int column0 = 1);

}  // namespace stochsym::expr
