#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace stochsym::expr {

enum class VarKind : std::uint8_t { State, Time, Noise };

// A variable of the canonical space: x1..xn, t, w1..wm. Indices are 1-based
// for state and noise variables and 0 for time.
struct Variable {
  VarKind kind = VarKind::Time;
  int index = 0;

  static Variable x(int i) { return {VarKind::State, i}; }
  static Variable time() { return {VarKind::Time, 0}; }
  static Variable w(int k) { return {VarKind::Noise, k}; }

  std::string name() const;

  auto operator<=>(const Variable&) const = default;
};

class VariableSpace {
 public:
  VariableSpace(int n, int m);

  int n() const { return n_; }
  int m() const { return m_; }
  int size() const { return n_ + 1 + m_; }

  bool contains(Variable v) const;
  std::optional<Variable> lookup(std::string_view name) const;

  // Slot layout used by compiled evaluation: x1..xn, t, w1..wm.
  int slot(Variable v) const;
  std::vector<Variable> variables() const;

  bool operator==(const VariableSpace&) const = default;

 private:
  int n_;
  int m_;
};

struct Point {
  std::vector<double> x;
  double t = 0.0;
  std::vector<double> w;

  double value(Variable v) const;
  // Flattened in VariableSpace slot order.
  std::vector<double> slots() const;
  static Point from_slots(const std::vector<double>& slots, int n, int m);
};

enum class Op : std::uint8_t {
  Const,
  Var,
  Neg,
  Exp,
  Log,
  Sin,
  Cos,
  Sqrt,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
};

bool is_unary(Op op);
bool is_binary(Op op);
const char* function_name(Op op);

struct Node;

// Immutable symbolic expression. Copies share structure; safe to share
// across threads.
class Expression {
 public:
  Expression();  // the constant 0
  explicit Expression(double value);
  explicit Expression(Variable v);
  // Empty handle; only used for the unused child slots of leaf nodes.
  explicit Expression(std::nullptr_t) {}

  static Expression unary(Op op, Expression arg);
  static Expression binary(Op op, Expression lhs, Expression rhs);

  Op op() const;
  double value() const;          // Const only
  Variable variable() const;     // Var only
  const Expression& arg() const; // unary, and lhs of binary
  const Expression& lhs() const;
  const Expression& rhs() const;

  bool is_constant() const { return op() == Op::Const; }
  bool is_constant(double v) const { return is_constant() && value() == v; }

  const Node* id() const { return node_.get(); }

 private:
  explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Node {
  Op op = Op::Const;
  double value = 0.0;
  Variable var{};
  Expression a{nullptr};
  Expression b{nullptr};
};

Expression constant(double v);
Expression var(Variable v);

// Builders with light folding (constant folding, 0/1 identities). The parser
// uses the raw Expression::unary/binary factories instead.
Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression pow(const Expression& base, const Expression& exponent);
Expression exp(const Expression& a);
Expression log(const Expression& a);
Expression sin(const Expression& a);
Expression cos(const Expression& a);
Expression sqrt(const Expression& a);

std::string to_string(const Expression& e);
bool structurally_equal(const Expression& a, const Expression& b);
std::size_t node_count(const Expression& e);

std::set<Variable> free_variables(const Expression& e);
bool depends_on(const Expression& e, Variable v);
bool depends_on_kind(const Expression& e, VarKind kind);

// Throws DomainError on a singular operation (log of non-positive, division
// by zero, non-finite result, ...).
double evaluate(const Expression& e, const Point& p);
// Same, but returns NaN instead of throwing.
double evaluate_or_nan(const Expression& e, const Point& p);

Expression differentiate(const Expression& e, Variable v);

// Simultaneous substitution of variables.
Expression substitute(const Expression& e, const std::map<Variable, Expression>& replacement);

}  // namespace stochsym::expr
