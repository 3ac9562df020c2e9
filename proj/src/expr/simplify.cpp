#include "expr/simplify.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace stochsym::expr {

namespace {

// Products whose expansion would exceed this many terms stay factored.
constexpr std::size_t kExpandLimit = 256;
constexpr int kMaxExpandPower = 6;
constexpr int kMaxPasses = 64;

struct Poly;

struct Factor {
  Expression base;
  double exponent = 1.0;
};

struct Term {
  double coeff = 1.0;
  std::map<std::string, Factor> factors;
  std::shared_ptr<const Poly> exp_arg;  // null when the term has no exp factor
};

// Sum of monomials keyed by their printed monomial; "" is the constant term.
struct Poly {
  std::map<std::string, Term> terms;
};

Expression rebuild(const Poly& p);

std::string number_key(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

bool is_integer(double v) { return std::isfinite(v) && std::trunc(v) == v; }

std::optional<double> constant_value(const Poly& p) {
  if (p.terms.empty()) return 0.0;
  if (p.terms.size() == 1 && p.terms.begin()->first.empty()) return p.terms.begin()->second.coeff;
  return std::nullopt;
}

std::string term_key(const Term& t) {
  std::string key;
  for (const auto& [k, f] : t.factors) {
    key += k;
    key += '^';
    key += number_key(f.exponent);
    key += ';';
  }
  if (t.exp_arg) {
    key += "exp(";
    key += to_string(rebuild(*t.exp_arg));
    key += ')';
  }
  return key;
}

void normalize(Term& t) {
  if (t.exp_arg) {
    if (auto c = constant_value(*t.exp_arg)) {
      const double scaled = t.coeff * std::exp(*c);
      if (std::isfinite(scaled)) {
        t.coeff = scaled;
        t.exp_arg.reset();
      }
    }
  }
}

void add_term(Poly& p, Term t) {
  normalize(t);
  if (t.coeff == 0.0) return;
  std::string key = term_key(t);
  auto it = p.terms.find(key);
  if (it == p.terms.end()) {
    p.terms.emplace(std::move(key), std::move(t));
    return;
  }
  const double a = it->second.coeff;
  const double sum = a + t.coeff;
  // Drop exact and last-ulp cancellations.
  if (std::abs(sum) <= 4e-16 * std::max(std::abs(a), std::abs(t.coeff))) {
    p.terms.erase(it);
  } else {
    it->second.coeff = sum;
  }
}

Poly constant_poly(double c) {
  Poly p;
  if (c != 0.0) {
    Term t;
    t.coeff = c;
    p.terms.emplace("", std::move(t));
  }
  return p;
}

Poly atomic(const Expression& e) {
  Term t;
  t.factors.emplace(to_string(e), Factor{e, 1.0});
  Poly p;
  add_term(p, std::move(t));
  return p;
}

Poly add(const Poly& a, const Poly& b) {
  Poly out = a;
  for (const auto& [k, t] : b.terms) add_term(out, t);
  return out;
}

Poly scale(const Poly& a, double c) {
  Poly out;
  if (c == 0.0) return out;
  for (const auto& [k, t] : a.terms) {
    Term s = t;
    s.coeff *= c;
    add_term(out, std::move(s));
  }
  return out;
}

Term multiply_terms(const Term& a, const Term& b) {
  Term out = a;
  out.coeff *= b.coeff;
  for (const auto& [k, f] : b.factors) {
    auto it = out.factors.find(k);
    if (it == out.factors.end()) {
      out.factors.emplace(k, f);
    } else {
      it->second.exponent += f.exponent;
      if (it->second.exponent == 0.0) out.factors.erase(it);
    }
  }
  if (b.exp_arg) {
    out.exp_arg = out.exp_arg ? std::make_shared<const Poly>(add(*out.exp_arg, *b.exp_arg))
                              : b.exp_arg;
  }
  return out;
}

Poly multiply(const Poly& a, const Poly& b) {
  if (auto c = constant_value(a)) return scale(b, *c);
  if (auto c = constant_value(b)) return scale(a, *c);
  if (a.terms.size() * b.terms.size() > kExpandLimit) {
    Term t;
    Expression ea = rebuild(a);
    Expression eb = rebuild(b);
    t.factors.emplace(to_string(ea), Factor{ea, 1.0});
    auto kb = to_string(eb);
    auto it = t.factors.find(kb);
    if (it != t.factors.end()) {
      it->second.exponent += 1.0;
    } else {
      t.factors.emplace(kb, Factor{eb, 1.0});
    }
    Poly out;
    add_term(out, std::move(t));
    return out;
  }
  Poly out;
  for (const auto& [ka, ta] : a.terms) {
    for (const auto& [kb, tb] : b.terms) add_term(out, multiply_terms(ta, tb));
  }
  return out;
}

const Term& leading_term(const Poly& p) {
  for (const auto& [k, t] : p.terms) {
    if (!k.empty()) return t;
  }
  return p.terms.begin()->second;
}

// Pulls the leading coefficient out of a multi-term base: (k*s)^p = k^p s^p.
// For non-integer p only |k| is pulled, which keeps the identity valid.
Poly factored_power(const Poly& base, double p) {
  double k = leading_term(base).coeff;
  if (!is_integer(p)) k = std::abs(k);
  const double kp = std::pow(k, p);
  Expression normalized = rebuild(scale(base, 1.0 / k));
  Term t;
  t.coeff = std::isfinite(kp) ? kp : 1.0;
  if (!std::isfinite(kp)) normalized = rebuild(base);
  t.factors.emplace(to_string(normalized), Factor{normalized, p});
  Poly out;
  add_term(out, std::move(t));
  return out;
}

Poly power(const Poly& base, double p, const Expression& original) {
  if (p == 0.0) return constant_poly(1.0);
  if (p == 1.0) return base;
  if (base.terms.empty()) {
    if (p > 0.0) return Poly{};
    return atomic(original);
  }
  if (base.terms.size() == 1) {
    const Term& t = base.terms.begin()->second;
    bool allowed = is_integer(p);
    if (!allowed && t.coeff > 0.0) {
      allowed = true;
      for (const auto& [k, f] : t.factors) {
        if (is_integer(f.exponent) && std::fmod(f.exponent, 2.0) == 0.0) allowed = false;
      }
    }
    const double cp = std::pow(t.coeff, p);
    if (!allowed || !std::isfinite(cp)) return atomic(original);
    Term out;
    out.coeff = cp;
    for (const auto& [k, f] : t.factors) out.factors.emplace(k, Factor{f.base, f.exponent * p});
    if (t.exp_arg) out.exp_arg = std::make_shared<const Poly>(scale(*t.exp_arg, p));
    Poly result;
    add_term(result, std::move(out));
    return result;
  }
  if (p > 0.0 && is_integer(p) && p <= kMaxExpandPower &&
      std::pow(static_cast<double>(base.terms.size()), p) <= static_cast<double>(kExpandLimit)) {
    Poly out = base;
    for (int i = 1; i < static_cast<int>(p); ++i) out = multiply(out, base);
    return out;
  }
  return factored_power(base, p);
}

Poly reciprocal(const Poly& p, const Expression& original) {
  if (p.terms.size() == 1) return power(p, -1.0, original);
  if (p.terms.empty()) return atomic(original);
  return factored_power(p, -1.0);
}

Poly to_poly(const Expression& e);

Poly unary_atomic(Op op, const Expression& arg) {
  Poly a = to_poly(arg);
  if (auto c = constant_value(a)) {
    Expression folded = Expression::unary(op, constant(*c));
    const double v = evaluate_or_nan(folded, Point{});
    if (std::isfinite(v)) return constant_poly(v);
    return atomic(folded);
  }
  return atomic(Expression::unary(op, rebuild(a)));
}

// 1/e, walking products and powers so that factored denominators stay
// factored instead of being expanded first.
Poly reciprocal_poly(const Expression& e) {
  switch (e.op()) {
    case Op::Mul: return multiply(reciprocal_poly(e.lhs()), reciprocal_poly(e.rhs()));
    case Op::Div: return multiply(reciprocal_poly(e.lhs()), to_poly(e.rhs()));
    case Op::Neg: return scale(reciprocal_poly(e.arg()), -1.0);
    case Op::Pow: {
      Poly ex = to_poly(e.rhs());
      auto p = constant_value(ex);
      if (!p) break;
      Poly base = to_poly(e.lhs());
      if (constant_value(base)) break;
      return power(base, -*p,
                   Expression::binary(Op::Pow, rebuild(base), constant(-*p)));
    }
    default: break;
  }
  Poly den = to_poly(e);
  return reciprocal(den, Expression::binary(Op::Div, constant(1.0), rebuild(den)));
}

Poly to_poly(const Expression& e) {
  switch (e.op()) {
    case Op::Const: return constant_poly(e.value());
    case Op::Var: return atomic(e);
    case Op::Neg: return scale(to_poly(e.arg()), -1.0);
    case Op::Add: return add(to_poly(e.lhs()), to_poly(e.rhs()));
    case Op::Sub: return add(to_poly(e.lhs()), scale(to_poly(e.rhs()), -1.0));
    case Op::Mul: return multiply(to_poly(e.lhs()), to_poly(e.rhs()));
    case Op::Div: return multiply(to_poly(e.lhs()), reciprocal_poly(e.rhs()));
    case Op::Pow: {
      Poly base = to_poly(e.lhs());
      Poly ex = to_poly(e.rhs());
      if (auto p = constant_value(ex)) {
        if (auto b = constant_value(base)) {
          const double v = std::pow(*b, *p);
          const bool defined = !(*b < 0.0 && !is_integer(*p)) && !(*b == 0.0 && *p < 0.0);
          if (defined && std::isfinite(v)) return constant_poly(v);
        }
        return power(base, *p, Expression::binary(Op::Pow, rebuild(base), constant(*p)));
      }
      // exp(a)^b = exp(a*b)
      if (base.terms.size() == 1) {
        const Term& t = base.terms.begin()->second;
        if (t.coeff == 1.0 && t.factors.empty() && t.exp_arg) {
          Term out;
          out.exp_arg = std::make_shared<const Poly>(multiply(*t.exp_arg, ex));
          Poly result;
          add_term(result, std::move(out));
          return result;
        }
      }
      return atomic(Expression::binary(Op::Pow, rebuild(base), rebuild(ex)));
    }
    case Op::Exp: {
      Poly a = to_poly(e.arg());
      // exp(c*log(u)) = u^c
      if (a.terms.size() == 1) {
        const Term& t = a.terms.begin()->second;
        if (!t.exp_arg && t.factors.size() == 1) {
          const Factor& f = t.factors.begin()->second;
          if (f.exponent == 1.0 && f.base.op() == Op::Log) {
            Expression u = f.base.arg();
            return power(to_poly(u), t.coeff,
                         Expression::binary(Op::Pow, u, constant(t.coeff)));
          }
        }
      }
      Term out;
      out.exp_arg = std::make_shared<const Poly>(std::move(a));
      Poly result;
      add_term(result, std::move(out));
      return result;
    }
    case Op::Log: {
      Poly a = to_poly(e.arg());
      if (a.terms.size() == 1) {
        const Term& t = a.terms.begin()->second;
        if (t.coeff == 1.0 && t.factors.empty() && t.exp_arg) return *t.exp_arg;
      }
      if (auto c = constant_value(a)) {
        if (*c > 0.0) return constant_poly(std::log(*c));
        return atomic(Expression::unary(Op::Log, constant(*c)));
      }
      return atomic(Expression::unary(Op::Log, rebuild(a)));
    }
    case Op::Sin:
    case Op::Cos:
    case Op::Sqrt: return unary_atomic(e.op(), e.arg());
  }
  return atomic(e);
}

// ------------------------------------------------------------------ rebuild

Expression product(const std::vector<Expression>& items) {
  Expression acc = items.front();
  for (std::size_t i = 1; i < items.size(); ++i) acc = Expression::binary(Op::Mul, acc, items[i]);
  return acc;
}

Expression factor_power(const Factor& f, double exponent) {
  if (exponent == 1.0) return f.base;
  return Expression::binary(Op::Pow, f.base, constant(exponent));
}

std::optional<double> reciprocal_integer(double c) {
  if (c == 0.0 || std::abs(c) >= 1.0) return std::nullopt;
  const double k = 1.0 / c;
  if (!is_integer(k) || std::abs(k) > 1e9 || 1.0 / k != c) return std::nullopt;
  return k;
}

std::string denominator_key(const Term& t) {
  std::string key;
  for (const auto& [k, f] : t.factors) {
    if (f.exponent < 0.0) {
      key += k;
      key += '^';
      key += number_key(f.exponent);
      key += ';';
    }
  }
  return key;
}

Expression numerator_expr(const Term& t, double coeff) {
  std::vector<Expression> nums;
  for (const auto& [k, f] : t.factors) {
    if (f.exponent > 0.0) nums.push_back(factor_power(f, f.exponent));
  }
  if (t.exp_arg) nums.push_back(Expression::unary(Op::Exp, rebuild(*t.exp_arg)));
  if (nums.empty()) return constant(coeff);
  Expression body = product(nums);
  if (coeff == 1.0) return body;
  if (coeff == -1.0) return Expression::unary(Op::Neg, body);
  if (auto k = reciprocal_integer(coeff)) {
    if (*k < 0.0) {
      return Expression::unary(Op::Neg, Expression::binary(Op::Div, body, constant(-*k)));
    }
    return Expression::binary(Op::Div, body, constant(*k));
  }
  return Expression::binary(Op::Mul, constant(coeff), body);
}

std::optional<Expression> denominator_expr(const Term& t) {
  std::vector<Expression> dens;
  for (const auto& [k, f] : t.factors) {
    if (f.exponent < 0.0) dens.push_back(factor_power(f, -f.exponent));
  }
  if (dens.empty()) return std::nullopt;
  return product(dens);
}

Expression term_expr(const Term& t, double coeff) {
  auto den = denominator_expr(t);
  if (!den) return numerator_expr(t, coeff);
  // c/D with c = 1/k reads as 1/(k*D)
  if (auto k = reciprocal_integer(coeff); k && *k > 0.0) {
    Expression num = numerator_expr(t, 1.0);
    return Expression::binary(Op::Div, num,
                              Expression::binary(Op::Mul, constant(*k), *den));
  }
  return Expression::binary(Op::Div, numerator_expr(t, coeff), *den);
}

struct Item {
  Expression expr;  // magnitude part when negative is set
  bool negative = false;
};

Expression rebuild(const Poly& p) {
  if (p.terms.empty()) return constant(0.0);

  // Group terms sharing a denominator: (a + b)/D rather than a/D + b/D.
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<const Term*>> groups;
  const Term* constant_term = nullptr;
  for (const auto& [k, t] : p.terms) {
    if (k.empty()) {
      constant_term = &t;
      continue;
    }
    std::string dk = denominator_key(t);
    auto [it, inserted] = groups.try_emplace(dk);
    if (inserted) group_order.push_back(dk);
    it->second.push_back(&t);
  }

  std::vector<Item> items;
  for (const auto& dk : group_order) {
    const auto& members = groups[dk];
    if (dk.empty() || members.size() == 1) {
      for (const Term* t : members) {
        const bool neg = t->coeff < 0.0;
        items.push_back({term_expr(*t, neg ? -t->coeff : t->coeff), neg});
      }
      continue;
    }
    Poly numerator;
    for (const Term* t : members) {
      Term n = *t;
      for (auto it = n.factors.begin(); it != n.factors.end();) {
        it = it->second.exponent < 0.0 ? n.factors.erase(it) : std::next(it);
      }
      add_term(numerator, std::move(n));
    }
    Expression den = *denominator_expr(*members.front());
    items.push_back({Expression::binary(Op::Div, rebuild(numerator), den), false});
  }
  if (constant_term) {
    const double c = constant_term->coeff;
    items.push_back({constant(std::abs(c)), c < 0.0});
  }

  Expression acc;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Item& item = items[i];
    if (i == 0) {
      if (!item.negative) {
        acc = item.expr;
      } else if (item.expr.is_constant()) {
        acc = constant(-item.expr.value());
      } else if (item.expr.op() == Op::Mul && item.expr.lhs().is_constant()) {
        acc = Expression::binary(Op::Mul, constant(-item.expr.lhs().value()), item.expr.rhs());
      } else {
        acc = Expression::unary(Op::Neg, item.expr);
      }
      continue;
    }
    acc = Expression::binary(item.negative ? Op::Sub : Op::Add, acc, item.expr);
  }
  return acc;
}

}  // namespace

Expression simplify(const Expression& e) {
  Expression current = e;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    Expression next = rebuild(to_poly(current));
    if (structurally_equal(next, current)) return current;
    current = next;
  }
  return current;
}

}  // namespace stochsym::expr
