#include "expr/compiled.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <tuple>
#include <unordered_map>

#include "expr/kernels.hpp"

namespace stochsym::expr {

namespace {

using Key = std::tuple<Op, std::uint64_t, std::int32_t, std::int32_t>;

}  // namespace

CompiledBundle::CompiledBundle(const std::vector<Expression>& exprs, const VariableSpace& space) {
  std::unordered_map<const Node*, std::int32_t> by_node;
  std::map<Key, std::int32_t> by_value;

  auto emit = [&](Instr in) {
    const std::uint64_t bits = in.op == Op::Const ? std::bit_cast<std::uint64_t>(in.value) : 0;
    Key key{in.op, bits, in.a, in.b};
    auto it = by_value.find(key);
    if (it != by_value.end()) return it->second;
    const auto reg = static_cast<std::int32_t>(code_.size());
    code_.push_back(in);
    by_value.emplace(key, reg);
    return reg;
  };

  // Iterative post-order so deep trees cannot overflow the call stack.
  auto compile = [&](const Expression& root) {
    std::vector<std::pair<const Expression*, bool>> stack{{&root, false}};
    while (!stack.empty()) {
      auto [e, expanded] = stack.back();
      stack.pop_back();
      if (by_node.count(e->id())) continue;
      const Op op = e->op();
      if (op == Op::Const) {
        by_node[e->id()] = emit({Op::Const, -1, -1, e->value()});
        continue;
      }
      if (op == Op::Var) {
        by_node[e->id()] = emit({Op::Var, space.slot(e->variable()), -1, 0.0});
        continue;
      }
      if (!expanded) {
        stack.push_back({e, true});
        stack.push_back({&e->lhs(), false});
        if (is_binary(op)) stack.push_back({&e->rhs(), false});
        continue;
      }
      Instr in{op, by_node.at(e->lhs().id()), -1, 0.0};
      if (is_binary(op)) in.b = by_node.at(e->rhs().id());
      by_node[e->id()] = emit(in);
    }
    return by_node.at(root.id());
  };

  for (const auto& e : exprs) outputs_.push_back(compile(e));
}

void CompiledBundle::evaluate(std::span<const double> slots, std::span<double> out,
                              std::vector<double>& scratch) const {
  scratch.resize(code_.size());
  double* r = scratch.data();
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& in = code_[i];
    switch (in.op) {
      case Op::Const: r[i] = in.value; break;
      case Op::Var: r[i] = slots[in.a]; break;
      case Op::Neg: r[i] = -r[in.a]; break;
      case Op::Add: r[i] = r[in.a] + r[in.b]; break;
      case Op::Sub: r[i] = r[in.a] - r[in.b]; break;
      case Op::Mul: r[i] = r[in.a] * r[in.b]; break;
      default:
        r[i] = is_unary(in.op) ? detail::apply_unary(in.op, r[in.a])
                               : detail::apply_binary(in.op, r[in.a], r[in.b]);
    }
  }
  for (std::size_t k = 0; k < outputs_.size(); ++k) {
    const double v = r[outputs_[k]];
    out[k] = std::isfinite(v) ? v : std::nan("");
  }
}

CompiledExpression::CompiledExpression(const Expression& e, const VariableSpace& space)
    : bundle_({e}, space) {}

double CompiledExpression::evaluate(std::span<const double> slots,
                                    std::vector<double>& scratch) const {
  double out = 0.0;
  bundle_.evaluate(slots, std::span<double>(&out, 1), scratch);
  return out;
}

double CompiledExpression::operator()(std::span<const double> slots) const {
  thread_local std::vector<double> scratch;
  return evaluate(slots, scratch);
}

}  // namespace stochsym::expr
