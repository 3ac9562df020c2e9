#include "transform/inversion.hpp"

#include <cmath>
#include <set>

#include "expr/compiled.hpp"
#include "expr/simplify.hpp"
#include "model/sampler.hpp"

namespace stochsym::transform {

using expr::constant;
using expr::differentiate;
using expr::Op;
using expr::Variable;

namespace {

const Variable Y = Variable::x(1);
const expr::VariableSpace kSpace(1, 1);
constexpr std::size_t kMaxCandidates = 16;

class Inverter {
 public:
  Inverter(const Expression& g, const model::Domain& domain)
      : g_(g), domain_(domain), points_(model::Sampler(kSpace, domain).sample({g}, 64)) {}

  std::optional<Expression> run() {
    if (points_.size() < 8) return std::nullopt;
    std::vector<Expression> cands;
    solve(g_, expr::var(Y), cands, 0);
    for (const auto& c : cands) {
      const Expression s = expr::simplify(c);
      if (verifies(s)) return s;
      if (verifies(c)) return c;
    }
    return std::nullopt;
  }

 private:
  bool y_free(const Expression& e) const { return !expr::depends_on(e, Y); }

  // d/dy e vanishes at the sample points.
  bool sampled_y_free(const Expression& e) const {
    if (y_free(e)) return true;
    const expr::CompiledBundle b({e, differentiate(e, Y)}, kSpace);
    std::vector<double> out(2), scratch;
    int ok = 0;
    for (const auto& p : points_) {
      b.evaluate(p, out, scratch);
      if (!std::isfinite(out[0]) || !std::isfinite(out[1])) continue;
      if (std::abs(out[1]) > 1e-9 * (1.0 + std::abs(out[0]))) return false;
      ++ok;
    }
    return ok >= 8;
  }

  // A y-free stand-in for e, which must be sampled y-free.
  Expression collapse(const Expression& e) const {
    const Expression s = expr::simplify(e);
    if (y_free(s)) return s;
    const double y_ref = 0.5 * (domain_.x[0].lo + domain_.x[0].hi);
    return expr::simplify(expr::substitute(s, {{Y, constant(y_ref)}}));
  }

  bool verifies(const Expression& cand) const {
    const expr::CompiledExpression gc(g_, kSpace);
    const expr::CompiledExpression cc(cand, kSpace);
    int ok = 0;
    for (const auto& p : points_) {
      std::vector<double> q(p);
      q[0] = gc(p);
      if (!std::isfinite(q[0])) continue;
      const double back = cc(q);
      if (!(std::abs(back - p[0]) <= 1e-9 * (1.0 + std::abs(p[0])))) return false;
      ++ok;
    }
    return ok >= static_cast<int>(points_.size()) / 2;
  }

  void push(std::vector<Expression>& out, Expression e) const {
    if (out.size() < kMaxCandidates) out.push_back(std::move(e));
  }

  void solve(const Expression& g, const Expression& X, std::vector<Expression>& out, int depth) {
    if (depth > 64 || out.size() >= kMaxCandidates) return;
    if (g.op() == Op::Var && g.variable() == Y) {
      push(out, X);
      return;
    }
    if (y_free(g)) return;
    switch (g.op()) {
      case Op::Neg:
        return solve(g.arg(), -X, out, depth + 1);
      case Op::Exp:
        return solve(g.arg(), expr::log(X), out, depth + 1);
      case Op::Log:
        return solve(g.arg(), expr::exp(X), out, depth + 1);
      case Op::Sqrt:
        return solve(g.arg(), X * X, out, depth + 1);
      case Op::Add:
        if (y_free(g.lhs())) return solve(g.rhs(), X - g.lhs(), out, depth + 1);
        if (y_free(g.rhs())) return solve(g.lhs(), X - g.rhs(), out, depth + 1);
        break;
      case Op::Sub:
        if (y_free(g.lhs())) return solve(g.rhs(), g.lhs() - X, out, depth + 1);
        if (y_free(g.rhs())) return solve(g.lhs(), X + g.rhs(), out, depth + 1);
        break;
      case Op::Mul:
        if (y_free(g.lhs())) return solve(g.rhs(), X / g.lhs(), out, depth + 1);
        if (y_free(g.rhs())) return solve(g.lhs(), X / g.rhs(), out, depth + 1);
        break;
      case Op::Div:
        if (y_free(g.rhs())) return solve(g.lhs(), X * g.rhs(), out, depth + 1);
        if (y_free(g.lhs())) return solve(g.rhs(), g.lhs() / X, out, depth + 1);
        break;
      case Op::Pow:
        if (y_free(g.rhs())) {
          const Expression& c = g.rhs();
          const Expression root = expr::pow(X, constant(1.0) / c);
          const double k = c.op() == Op::Const ? c.value() : 0.5;
          if (c.op() == Op::Const && k == std::round(k)) {
            solve(g.lhs(), root, out, depth + 1);
            solve(g.lhs(), -root, out, depth + 1);
            if (std::fmod(std::abs(k), 2.0) == 1.0) {
              solve(g.lhs(), -expr::pow(-X, constant(1.0) / c), out, depth + 1);
            }
            return;
          }
          return solve(g.lhs(), root, out, depth + 1);
        }
        if (y_free(g.lhs())) return solve(g.rhs(), expr::log(X) / expr::log(g.lhs()), out, depth + 1);
        break;
      default:
        break;
    }
    patterns(g, X, out);
  }

  void quadratic_roots(const Expression& A, const Expression& B, const Expression& C, const Expression& X,
                       std::vector<Expression>& roots) const {
    const Expression disc = expr::sqrt(B * B - constant(4.0) * A * (C - X));
    roots.push_back((-B + disc) / (constant(2.0) * A));
    roots.push_back((-B - disc) / (constant(2.0) * A));
  }

  bool sampled_zero(const Expression& e, const Expression& scale) const {
    const expr::CompiledBundle b({e, scale}, kSpace);
    std::vector<double> out(2), scratch;
    for (const auto& p : points_) {
      b.evaluate(p, out, scratch);
      if (std::isfinite(out[0]) && std::abs(out[0]) > 1e-12 * (1.0 + std::abs(out[1]))) return false;
    }
    return true;
  }

  void patterns(const Expression& g, const Expression& X, std::vector<Expression>& out) {
    const Expression y = expr::var(Y);
    const Expression gy = expr::simplify(differentiate(g, Y));
    // Linear in y.
    if (sampled_y_free(gy)) {
      const Expression a = collapse(gy);
      const Expression b = collapse(g - a * y);
      push(out, (X - b) / a);
      return;
    }
    // Quadratic in y.
    const Expression gyy = expr::simplify(differentiate(gy, Y));
    if (sampled_y_free(gyy)) {
      const Expression A = collapse(gyy / constant(2.0));
      const Expression B = collapse(gy - constant(2.0) * A * y);
      const Expression C = collapse(g - A * y * y - B * y);
      std::vector<Expression> roots;
      quadratic_roots(A, B, C, X, roots);
      for (auto& r : roots) push(out, r);
    }
    // Linear or quadratic in u = e^{k y}.
    for (double k : exp_rates(g)) {
      const Expression u = expr::exp(constant(k) * y);
      const Expression Dg = differentiate(g, Y) / constant(k);
      const Expression DDg = differentiate(Dg, Y) / constant(k);
      const Expression A0 = expr::simplify((DDg - Dg) / (constant(2.0) * u * u));
      const Expression B0 = expr::simplify((constant(2.0) * Dg - DDg) / u);
      if (!sampled_y_free(A0) || !sampled_y_free(B0)) continue;
      const Expression A = collapse(A0);
      const Expression B = collapse(B0);
      const Expression C0 = expr::simplify(g - A * u * u - B * u);
      if (!sampled_y_free(C0)) continue;
      const Expression C = collapse(C0);
      std::vector<Expression> us;
      if (sampled_zero(A, B)) {
        us.push_back((X - C) / B);
      } else {
        quadratic_roots(A, B, C, X, us);
      }
      for (auto& uu : us) push(out, expr::log(uu) / constant(k));
    }
    // Moebius (a y + b) / (c y + d).
    if (g.op() == Op::Div) {
      const Expression N = g.lhs();
      const Expression D = g.rhs();
      const Expression Ny = expr::simplify(differentiate(N, Y));
      const Expression Dy = expr::simplify(differentiate(D, Y));
      if (sampled_y_free(Ny) && sampled_y_free(Dy)) {
        const Expression a = collapse(Ny);
        const Expression c = collapse(Dy);
        const Expression b = collapse(N - a * y);
        const Expression d = collapse(D - c * y);
        push(out, (d * X - b) / (a - c * X));
      }
    }
  }

  // |k| for every exp(k y + h) in g with constant k, smallest first.
  std::vector<double> exp_rates(const Expression& g) const {
    std::set<double> ks;
    std::vector<Expression> stack{g};
    std::set<const expr::Node*> seen;
    while (!stack.empty()) {
      Expression e = stack.back();
      stack.pop_back();
      if (!seen.insert(e.id()).second) continue;
      if (e.op() == Op::Exp) {
        const Expression d = expr::simplify(differentiate(e.arg(), Y));
        if (d.op() == Op::Const && d.value() != 0.0) ks.insert(std::abs(d.value()));
      }
      if (expr::is_unary(e.op())) stack.push_back(e.arg());
      if (expr::is_binary(e.op())) {
        stack.push_back(e.lhs());
        stack.push_back(e.rhs());
      }
    }
    return {ks.begin(), ks.end()};
  }

  Expression g_;
  model::Domain domain_;
  std::vector<std::vector<double>> points_;
};

}  // namespace

std::optional<Expression> invert_scalar(const Expression& g, const model::Domain& domain) {
  return Inverter(g, domain).run();
}

}  // namespace stochsym::transform
