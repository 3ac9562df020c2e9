#include "expr/integrate.hpp"

#include <cmath>
#include <vector>

#include "common/halton.hpp"
#include "expr/simplify.hpp"

namespace stochsym::expr {

namespace {

constexpr int kMaxDepth = 8;
constexpr double kVerifyTol = 1e-9;

struct ProductForm {
  double coeff = 1.0;
  std::vector<std::pair<Expression, double>> factors;
  bool ok = true;
};

void flatten(const Expression& e, double power, ProductForm& out) {
  switch (e.op()) {
    case Op::Const:
      if (e.value() == 0.0 && power < 0.0) {
        out.ok = false;
        return;
      }
      out.coeff *= power > 0.0 ? e.value() : 1.0 / e.value();
      return;
    case Op::Neg:
      out.coeff = -out.coeff;
      flatten(e.arg(), power, out);
      return;
    case Op::Mul:
      flatten(e.lhs(), power, out);
      flatten(e.rhs(), power, out);
      return;
    case Op::Div:
      flatten(e.lhs(), power, out);
      flatten(e.rhs(), -power, out);
      return;
    case Op::Pow:
      if (e.rhs().is_constant()) {
        out.factors.emplace_back(e.lhs(), e.rhs().value() * power);
        return;
      }
      break;
    default: break;
  }
  out.factors.emplace_back(e, power);
}

Expression product_of(const std::vector<std::pair<Expression, double>>& factors, std::size_t skip) {
  Expression acc = constant(1.0);
  for (std::size_t j = 0; j < factors.size(); ++j) {
    if (j == skip) continue;
    acc = acc * pow(factors[j].first, constant(factors[j].second));
  }
  return acc;
}

int max_index(const std::set<Variable>& vars, VarKind kind) {
  int m = 0;
  for (const auto& v : vars) {
    if (v.kind == kind) m = std::max(m, v.index);
  }
  return m;
}

// d/dv A == e at sampled points of two boxes, one strictly positive.
bool verify(const Expression& antiderivative, const Expression& e, Variable v) {
  const Expression d = differentiate(antiderivative, v);
  std::set<Variable> vars = free_variables(e);
  for (const auto& u : free_variables(antiderivative)) vars.insert(u);
  vars.insert(v);
  const int n = max_index(vars, VarKind::State);
  const int m = max_index(vars, VarKind::Noise);
  const int dims = n + 1 + m;
  int valid = 0;
  for (int box = 0; box < 2; ++box) {
    const double lo = box == 0 ? 0.2 : -1.9;
    const double hi = box == 0 ? 1.8 : 1.9;
    for (int i = 0; i < 32; ++i) {
      std::vector<double> slots(dims);
      for (int k = 0; k < dims; ++k) slots[k] = lo + (hi - lo) * halton(i, k);
      const Point p = Point::from_slots(slots, n, m);
      const double want = evaluate_or_nan(e, p);
      const double got = evaluate_or_nan(d, p);
      if (!std::isfinite(want) || !std::isfinite(got)) continue;
      ++valid;
      if (std::abs(got - want) > kVerifyTol * (1.0 + std::abs(want))) return false;
    }
  }
  return valid >= 8;
}

std::optional<Expression> integrate_impl(const Expression& e, Variable v, int depth);

std::optional<Expression> integrate_product(const Expression& e, Variable v) {
  ProductForm form;
  flatten(e, 1.0, form);
  if (!form.ok) return std::nullopt;

  std::vector<std::pair<Expression, double>> dep;
  Expression indep = constant(form.coeff);
  for (const auto& f : form.factors) {
    if (depends_on(f.first, v)) {
      dep.push_back(f);
    } else {
      indep = indep * pow(f.first, constant(f.second));
    }
  }
  if (dep.empty()) return indep * var(v);

  for (std::size_t i = 0; i < dep.size(); ++i) {
    const auto& [base, p] = dep[i];
    enum class Kind { Power, Exp, Sin, Cos } kind = Kind::Power;
    Expression g = base;
    double exponent = p;
    if (base.op() == Op::Exp) {
      kind = Kind::Exp;
      g = p == 1.0 ? base.arg() : constant(p) * base.arg();
    } else if ((base.op() == Op::Sin || base.op() == Op::Cos) && p == 1.0) {
      kind = base.op() == Op::Sin ? Kind::Sin : Kind::Cos;
      g = base.arg();
    }
    const Expression gprime = simplify(differentiate(g, v));
    if (gprime.is_constant(0.0)) continue;
    const Expression ratio = simplify(product_of(dep, i) / gprime);
    if (depends_on(ratio, v)) continue;

    Expression outer;
    switch (kind) {
      case Kind::Exp: outer = exp(g); break;
      case Kind::Sin: outer = -cos(g); break;
      case Kind::Cos: outer = sin(g); break;
      case Kind::Power:
        if (exponent == -1.0) {
          outer = log(pow(g, constant(2.0))) / constant(2.0);
        } else {
          outer = pow(g, constant(exponent + 1.0)) / constant(exponent + 1.0);
        }
        break;
    }
    return indep * ratio * outer;
  }
  return std::nullopt;
}

std::optional<Expression> integrate_impl(const Expression& e, Variable v, int depth) {
  if (!depends_on(e, v)) return e * var(v);
  if (depth > kMaxDepth) return std::nullopt;
  switch (e.op()) {
    case Op::Add:
    case Op::Sub: {
      auto a = integrate_impl(e.lhs(), v, depth + 1);
      if (!a) return std::nullopt;
      auto b = integrate_impl(e.rhs(), v, depth + 1);
      if (!b) return std::nullopt;
      return e.op() == Op::Add ? *a + *b : *a - *b;
    }
    case Op::Neg: {
      auto a = integrate_impl(e.arg(), v, depth + 1);
      if (!a) return std::nullopt;
      return -*a;
    }
    case Op::Div:
      if (e.lhs().op() == Op::Add || e.lhs().op() == Op::Sub) {
        Expression split = Expression::binary(e.lhs().op(), e.lhs().lhs() / e.rhs(),
                                              e.lhs().rhs() / e.rhs());
        return integrate_impl(split, v, depth + 1);
      }
      break;
    case Op::Mul:
      for (int side = 0; side < 2; ++side) {
        const Expression& sum = side == 0 ? e.lhs() : e.rhs();
        const Expression& other = side == 0 ? e.rhs() : e.lhs();
        if (sum.op() == Op::Add || sum.op() == Op::Sub) {
          if (auto direct = integrate_product(e, v)) return direct;
          Expression split = Expression::binary(sum.op(), sum.lhs() * other, sum.rhs() * other);
          return integrate_impl(split, v, depth + 1);
        }
      }
      break;
    default: break;
  }
  return integrate_product(e, v);
}

}  // namespace

std::optional<Expression> integrate_rule_based(const Expression& e, Variable v) {
  const Expression simplified = simplify(e);
  for (const Expression* candidate : {&simplified, &e}) {
    if (auto a = integrate_impl(*candidate, v, 0)) {
      Expression result = simplify(*a);
      if (verify(result, e, v)) return result;
      if (verify(*a, e, v)) return *a;
    }
  }
  return std::nullopt;
}

}  // namespace stochsym::expr
