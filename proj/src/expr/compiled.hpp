#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "expr/expression.hpp"

namespace stochsym::expr {

// Straight-line program evaluating several expressions at once, e.g. all
// coefficients of a system. Common subexpressions are computed once. Inputs
// are passed in VariableSpace slot order (x1..xn, t, w1..wm). Singular
// operations yield NaN rather than throwing; otherwise the bits match
// evaluate().
class CompiledBundle {
 public:
  CompiledBundle() = default;
  CompiledBundle(const std::vector<Expression>& exprs, const VariableSpace& space);

  // out.size() must equal size().
  void evaluate(std::span<const double> slots, std::span<double> out,
                std::vector<double>& scratch) const;
  std::size_t size() const { return outputs_.size(); }
  std::size_t instruction_count() const { return code_.size(); }

 private:
  struct Instr {
    Op op;
    std::int32_t a = -1;  // register, or input slot for Var
    std::int32_t b = -1;
    double value = 0.0;
  };
  std::vector<Instr> code_;  // instruction i writes register i
  std::vector<std::int32_t> outputs_;
};

class CompiledExpression {
 public:
  CompiledExpression() = default;
  CompiledExpression(const Expression& e, const VariableSpace& space);

  double operator()(std::span<const double> slots) const;
  double evaluate(std::span<const double> slots, std::vector<double>& scratch) const;

 private:
  CompiledBundle bundle_;
};

}  // namespace stochsym::expr
