#include "expr/expression.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <unordered_map>

#include "common/error.hpp"
#include "expr/kernels.hpp"

namespace stochsym::expr {

using detail::apply_binary;
using detail::apply_unary;

std::string Variable::name() const {
  switch (kind) {
    case VarKind::State: return "x" + std::to_string(index);
    case VarKind::Time: return "t";
    case VarKind::Noise: return "w" + std::to_string(index);
  }
  return "?";
}

VariableSpace::VariableSpace(int n, int m) : n_(n), m_(m) {
  if (n < 0 || m < 0) {
    throw Error(ErrorCode::Dimension, "variable space dimensions must be nonnegative");
  }
}

bool VariableSpace::contains(Variable v) const {
  switch (v.kind) {
    case VarKind::State: return v.index >= 1 && v.index <= n_;
    case VarKind::Time: return true;
    case VarKind::Noise: return v.index >= 1 && v.index <= m_;
  }
  return false;
}

std::optional<Variable> VariableSpace::lookup(std::string_view name) const {
  if (name == "t") return Variable::time();
  if (name.size() < 2 || (name[0] != 'x' && name[0] != 'w')) return std::nullopt;
  if (name[1] == '0') return std::nullopt;
  int index = 0;
  auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
  if (ec != std::errc() || ptr != name.data() + name.size()) return std::nullopt;
  Variable v = name[0] == 'x' ? Variable::x(index) : Variable::w(index);
  if (!contains(v)) return std::nullopt;
  return v;
}

int VariableSpace::slot(Variable v) const {
  if (!contains(v)) throw Error(ErrorCode::UnknownVariable, "variable " + v.name() + " not in space");
  switch (v.kind) {
    case VarKind::State: return v.index - 1;
    case VarKind::Time: return n_;
    case VarKind::Noise: return n_ + v.index;
  }
  return -1;
}

std::vector<Variable> VariableSpace::variables() const {
  std::vector<Variable> out;
  for (int i = 1; i <= n_; ++i) out.push_back(Variable::x(i));
  out.push_back(Variable::time());
  for (int k = 1; k <= m_; ++k) out.push_back(Variable::w(k));
  return out;
}

double Point::value(Variable v) const {
  switch (v.kind) {
    case VarKind::State:
      if (v.index < 1 || v.index > static_cast<int>(x.size())) {
        throw Error(ErrorCode::Dimension, "point has no coordinate " + v.name());
      }
      return x[v.index - 1];
    case VarKind::Time: return t;
    case VarKind::Noise:
      if (v.index < 1 || v.index > static_cast<int>(w.size())) {
        throw Error(ErrorCode::Dimension, "point has no coordinate " + v.name());
      }
      return w[v.index - 1];
  }
  return 0.0;
}

std::vector<double> Point::slots() const {
  std::vector<double> out(x);
  out.push_back(t);
  out.insert(out.end(), w.begin(), w.end());
  return out;
}

Point Point::from_slots(const std::vector<double>& slots, int n, int m) {
  Point p;
  p.x.assign(slots.begin(), slots.begin() + n);
  p.t = slots[n];
  p.w.assign(slots.begin() + n + 1, slots.begin() + n + 1 + m);
  return p;
}

bool is_unary(Op op) {
  return op == Op::Neg || op == Op::Exp || op == Op::Log || op == Op::Sin || op == Op::Cos ||
         op == Op::Sqrt;
}

bool is_binary(Op op) {
  return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div || op == Op::Pow;
}

const char* function_name(Op op) {
  switch (op) {
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Sqrt: return "sqrt";
    default: return "";
  }
}

namespace {

const std::shared_ptr<const Node>& zero_node() {
  static const auto node = std::make_shared<const Node>();
  return node;
}

}  // namespace

Expression::Expression() : node_(zero_node()) {}

Expression::Expression(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = value;
  node_ = std::move(n);
}

Expression::Expression(Variable v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->var = v;
  node_ = std::move(n);
}

Expression Expression::unary(Op op, Expression arg) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(arg);
  return Expression(std::shared_ptr<const Node>(std::move(n)));
}

Expression Expression::binary(Op op, Expression lhs, Expression rhs) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(lhs);
  n->b = std::move(rhs);
  return Expression(std::shared_ptr<const Node>(std::move(n)));
}

Op Expression::op() const { return node_->op; }
double Expression::value() const { return node_->value; }
Variable Expression::variable() const { return node_->var; }
const Expression& Expression::arg() const { return node_->a; }
const Expression& Expression::lhs() const { return node_->a; }
const Expression& Expression::rhs() const { return node_->b; }

Expression constant(double v) { return Expression(v); }
Expression var(Variable v) { return Expression(v); }

namespace {

std::optional<Expression> fold_unary(Op op, const Expression& a) {
  if (!a.is_constant()) return std::nullopt;
  double r = apply_unary(op, a.value());
  if (!std::isfinite(r)) return std::nullopt;
  return constant(r);
}

std::optional<Expression> fold_binary(Op op, const Expression& a, const Expression& b) {
  if (!a.is_constant() || !b.is_constant()) return std::nullopt;
  double r = apply_binary(op, a.value(), b.value());
  if (!std::isfinite(r)) return std::nullopt;
  return constant(r);
}

}  // namespace

Expression operator+(const Expression& a, const Expression& b) {
  if (auto f = fold_binary(Op::Add, a, b)) return *f;
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expression::binary(Op::Add, a, b);
}

Expression operator-(const Expression& a, const Expression& b) {
  if (auto f = fold_binary(Op::Sub, a, b)) return *f;
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return Expression::binary(Op::Sub, a, b);
}

Expression operator*(const Expression& a, const Expression& b) {
  if (auto f = fold_binary(Op::Mul, a, b)) return *f;
  if (a.is_constant(0.0) || b.is_constant(0.0)) return constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return Expression::binary(Op::Mul, a, b);
}

Expression operator/(const Expression& a, const Expression& b) {
  if (auto f = fold_binary(Op::Div, a, b)) return *f;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return constant(0.0);
  return Expression::binary(Op::Div, a, b);
}

Expression operator-(const Expression& a) {
  if (auto f = fold_unary(Op::Neg, a)) return *f;
  if (a.op() == Op::Neg) return a.arg();
  return Expression::unary(Op::Neg, a);
}

Expression pow(const Expression& base, const Expression& exponent) {
  if (auto f = fold_binary(Op::Pow, base, exponent)) return *f;
  if (exponent.is_constant(1.0)) return base;
  if (exponent.is_constant(0.0)) return constant(1.0);
  if (base.is_constant(1.0)) return constant(1.0);
  return Expression::binary(Op::Pow, base, exponent);
}

Expression exp(const Expression& a) {
  if (auto f = fold_unary(Op::Exp, a)) return *f;
  return Expression::unary(Op::Exp, a);
}

Expression log(const Expression& a) {
  if (auto f = fold_unary(Op::Log, a)) return *f;
  return Expression::unary(Op::Log, a);
}

Expression sin(const Expression& a) {
  if (auto f = fold_unary(Op::Sin, a)) return *f;
  return Expression::unary(Op::Sin, a);
}

Expression cos(const Expression& a) {
  if (auto f = fold_unary(Op::Cos, a)) return *f;
  return Expression::unary(Op::Cos, a);
}

Expression sqrt(const Expression& a) {
  if (auto f = fold_unary(Op::Sqrt, a)) return *f;
  return Expression::unary(Op::Sqrt, a);
}

// ---------------------------------------------------------------- printing

namespace {

constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecNeg = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

int precedence(const Expression& e) {
  switch (e.op()) {
    case Op::Const: return e.value() < 0.0 || std::signbit(e.value()) ? kPrecNeg : kPrecAtom;
    case Op::Var: return kPrecAtom;
    case Op::Exp:
    case Op::Log:
    case Op::Sin:
    case Op::Cos:
    case Op::Sqrt: return kPrecAtom;
    case Op::Neg: return kPrecNeg;
    case Op::Add:
    case Op::Sub: return kPrecAdd;
    case Op::Mul:
    case Op::Div: return kPrecMul;
    case Op::Pow: return kPrecPow;
  }
  return kPrecAtom;
}

void format_number(double v, std::string& out) {
  if (std::isnan(v)) {
    out += "(0/0)";
    return;
  }
  if (std::isinf(v)) {
    out += v > 0 ? "(1/0)" : "(-1/0)";
    return;
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

void print(const Expression& e, std::string& out);

void print_child(const Expression& child, bool parenthesize, std::string& out) {
  if (parenthesize) out += '(';
  print(child, out);
  if (parenthesize) out += ')';
}

void print(const Expression& e, std::string& out) {
  switch (e.op()) {
    case Op::Const: format_number(e.value(), out); return;
    case Op::Var: out += e.variable().name(); return;
    case Op::Neg:
      out += '-';
      // "-a*b" would reparse as (-a)*b, a different tree
      print_child(e.arg(), precedence(e.arg()) <= kPrecMul, out);
      return;
    case Op::Exp:
    case Op::Log:
    case Op::Sin:
    case Op::Cos:
    case Op::Sqrt:
      out += function_name(e.op());
      out += '(';
      print(e.arg(), out);
      out += ')';
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(e);
      print_child(e.lhs(), precedence(e.lhs()) < p, out);
      out += e.op() == Op::Add ? '+' : e.op() == Op::Sub ? '-' : e.op() == Op::Mul ? '*' : '/';
      const int rp = precedence(e.rhs());
      // A negated right operand reads fine after '*' or '/', but "a+-b" and
      // "a--b" are avoided for legibility.
      bool paren = rp <= p || (p == kPrecAdd && rp == kPrecNeg);
      print_child(e.rhs(), paren, out);
      return;
    }
    case Op::Pow:
      print_child(e.lhs(), precedence(e.lhs()) < kPrecAtom, out);
      out += '^';
      print_child(e.rhs(), precedence(e.rhs()) < kPrecAtom, out);
      return;
  }
}

}  // namespace

std::string to_string(const Expression& e) {
  std::string out;
  print(e, out);
  return out;
}

bool structurally_equal(const Expression& a, const Expression& b) {
  if (a.id() == b.id()) return true;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::Const:
      return a.value() == b.value() && std::signbit(a.value()) == std::signbit(b.value());
    case Op::Var: return a.variable() == b.variable();
    default:
      if (is_unary(a.op())) return structurally_equal(a.arg(), b.arg());
      return structurally_equal(a.lhs(), b.lhs()) && structurally_equal(a.rhs(), b.rhs());
  }
}

std::size_t node_count(const Expression& e) {
  if (e.op() == Op::Const || e.op() == Op::Var) return 1;
  if (is_unary(e.op())) return 1 + node_count(e.arg());
  return 1 + node_count(e.lhs()) + node_count(e.rhs());
}

namespace {

void collect_variables(const Expression& e, std::set<Variable>& out) {
  switch (e.op()) {
    case Op::Const: return;
    case Op::Var: out.insert(e.variable()); return;
    default:
      collect_variables(e.lhs(), out);
      if (is_binary(e.op())) collect_variables(e.rhs(), out);
  }
}

}  // namespace

std::set<Variable> free_variables(const Expression& e) {
  std::set<Variable> out;
  collect_variables(e, out);
  return out;
}

bool depends_on(const Expression& e, Variable v) {
  switch (e.op()) {
    case Op::Const: return false;
    case Op::Var: return e.variable() == v;
    default:
      if (depends_on(e.lhs(), v)) return true;
      return is_binary(e.op()) && depends_on(e.rhs(), v);
  }
}

bool depends_on_kind(const Expression& e, VarKind kind) {
  for (const auto& v : free_variables(e)) {
    if (v.kind == kind) return true;
  }
  return false;
}

// -------------------------------------------------------------- evaluation

namespace {

double eval_checked(const Expression& e, const Point& p) {
  switch (e.op()) {
    case Op::Const: return e.value();
    case Op::Var: return p.value(e.variable());
    default: break;
  }
  double r;
  if (is_unary(e.op())) {
    const double a = eval_checked(e.arg(), p);
    r = apply_unary(e.op(), a);
    if (!std::isfinite(r)) {
      const char* why = e.op() == Op::Log    ? "log of non-positive argument"
                        : e.op() == Op::Sqrt ? "sqrt of negative argument"
                                             : "non-finite result";
      throw DomainError(why, to_string(e));
    }
  } else {
    const double a = eval_checked(e.lhs(), p);
    const double b = eval_checked(e.rhs(), p);
    r = apply_binary(e.op(), a, b);
    if (!std::isfinite(r)) {
      const char* why = (e.op() == Op::Div && b == 0.0)  ? "division by zero"
                        : (e.op() == Op::Pow && a <= 0.0) ? "power of non-positive base"
                                                          : "non-finite result";
      throw DomainError(why, to_string(e));
    }
  }
  return r;
}

double eval_nan(const Expression& e, const Point& p) {
  switch (e.op()) {
    case Op::Const: return e.value();
    case Op::Var: return p.value(e.variable());
    default: break;
  }
  if (is_unary(e.op())) return apply_unary(e.op(), eval_nan(e.arg(), p));
  return apply_binary(e.op(), eval_nan(e.lhs(), p), eval_nan(e.rhs(), p));
}

}  // namespace

double evaluate(const Expression& e, const Point& p) { return eval_checked(e, p); }

double evaluate_or_nan(const Expression& e, const Point& p) {
  double r = eval_nan(e, p);
  return std::isfinite(r) ? r : std::nan("");
}

// --------------------------------------------------------- differentiation

Expression differentiate(const Expression& e, Variable v) {
  switch (e.op()) {
    case Op::Const: return constant(0.0);
    case Op::Var: return constant(e.variable() == v ? 1.0 : 0.0);
    default: break;
  }
  if (!depends_on(e, v)) return constant(0.0);
  switch (e.op()) {
    case Op::Neg: return -differentiate(e.arg(), v);
    case Op::Exp: return e * differentiate(e.arg(), v);
    case Op::Log: return differentiate(e.arg(), v) / e.arg();
    case Op::Sin: return cos(e.arg()) * differentiate(e.arg(), v);
    case Op::Cos: return -(sin(e.arg()) * differentiate(e.arg(), v));
    case Op::Sqrt: return differentiate(e.arg(), v) / (constant(2.0) * e);
    case Op::Add: return differentiate(e.lhs(), v) + differentiate(e.rhs(), v);
    case Op::Sub: return differentiate(e.lhs(), v) - differentiate(e.rhs(), v);
    case Op::Mul:
      return differentiate(e.lhs(), v) * e.rhs() + e.lhs() * differentiate(e.rhs(), v);
    case Op::Div: {
      const Expression& num = e.lhs();
      const Expression& den = e.rhs();
      if (!depends_on(den, v)) return differentiate(num, v) / den;
      return (differentiate(num, v) * den - num * differentiate(den, v)) / pow(den, constant(2.0));
    }
    case Op::Pow: {
      const Expression& base = e.lhs();
      const Expression& ex = e.rhs();
      if (!depends_on(ex, v)) {
        return ex * pow(base, ex - constant(1.0)) * differentiate(base, v);
      }
      if (!depends_on(base, v)) return e * log(base) * differentiate(ex, v);
      return e * (differentiate(ex, v) * log(base) + ex * differentiate(base, v) / base);
    }
    default: break;
  }
  return constant(0.0);
}

Expression substitute(const Expression& e, const std::map<Variable, Expression>& replacement) {
  switch (e.op()) {
    case Op::Const: return e;
    case Op::Var: {
      auto it = replacement.find(e.variable());
      return it == replacement.end() ? e : it->second;
    }
    default: break;
  }
  if (is_unary(e.op())) {
    Expression a = substitute(e.arg(), replacement);
    if (a.id() == e.arg().id()) return e;
    return Expression::unary(e.op(), a);
  }
  Expression a = substitute(e.lhs(), replacement);
  Expression b = substitute(e.rhs(), replacement);
  if (a.id() == e.lhs().id() && b.id() == e.rhs().id()) return e;
  return Expression::binary(e.op(), a, b);
}

}  // namespace stochsym::expr
