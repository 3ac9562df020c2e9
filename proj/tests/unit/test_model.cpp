#include <gtest/gtest.h>

#include <cmath>

#include "common/error.hpp"
#include "expr/simplify.hpp"
#include "model/coefficients.hpp"
#include "model/operators.hpp"
#include "model/sampler.hpp"
#include "test_support.hpp"

namespace stochsym {
namespace {

using expr::constant;
using expr::Expression;
using expr::Point;
using expr::Variable;
using model::System;
using model::VectorField;
using testing::field;
using testing::P;
using testing::RandomExpr;
using testing::sampled_rel_diff;
using testing::scalar_system;

const Variable X1 = Variable::x(1);
const Variable W1 = Variable::w(1);

double sampled_abs(const Expression& e, int n, int m, double lo, double hi, int points = 100) {
  return sampled_rel_diff(e, constant(0.0), n, m, lo, hi, points);
}

TEST(Laplacian, StateOnlyTermSurvives) {
  const System sys = scalar_system("x1", "x1");
  const Expression e = P("x1^3");
  EXPECT_LT(sampled_rel_diff(model::ito_laplacian(sys, e), P("6*x1^3"), 1, 1, -2, 2, 100), 1e-12);
  EXPECT_TRUE(model::ito_laplacian(sys, constant(3.5)).is_constant(0.0));
}

// Second-order central differences of the full (y, w) Hessian.
double fd_laplacian(const Expression& e, const Expression& s, const Point& p) {
  const double h = 1e-4;
  auto at = [&](double dy, double dw) {
    Point q = p;
    q.x[0] += dy;
    q.w[0] += dw;
    return expr::evaluate(e, q);
  };
  const double f0 = at(0, 0);
  const double eyy = (at(h, 0) - 2 * f0 + at(-h, 0)) / (h * h);
  const double eww = (at(0, h) - 2 * f0 + at(0, -h)) / (h * h);
  const double eyw = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
  const double sv = expr::evaluate(s, p);
  return eww + sv * sv * eyy + 2 * sv * eyw;
}

TEST(Laplacian, RandomMapCandidateMatchesFiniteDifferences) {
  auto d = model::Domain::defaults(1, 1);
  d.x[0] = {0.1, 1.5};
  d.w[0] = {-1.0, 1.0};
  const System sys = System::ito(expr::VariableSpace(1, 1), {P("-(exp(-x1)+exp(-2*x1)/2)")},
                                 {{P("exp(-x1)")}}, d);
  const Expression phi = P("exp(x1)*(t-w1+1) + exp(2*x1)/2 + w1^2/2 - t*w1");
  const Expression lap = model::ito_laplacian(sys, phi);
  for (int i = 0; i < 50; ++i) {
    Point p{{0.1 + 1.4 * halton(i + 1, 0)}, 0.1 + 1.9 * halton(i + 1, 1), {-1.0 + 2.0 * halton(i + 1, 2)}};
    const double sym = expr::evaluate(lap, p);
    const double fd = fd_laplacian(phi, sys.diffusion(0, 0), p);
    EXPECT_LT(std::abs(sym - fd) / (1 + std::abs(fd)), 1e-5) << "point " << i;
  }
}

TEST(Laplacian, LinearAndStateOnlyIdentity) {
  const System sys = scalar_system("x1*t", "sin(x1)+2");
  RandomExpr gen(11);
  const std::map<Variable, Expression> drop_w{{W1, constant(0.0)}};
  for (int k = 0; k < 30; ++k) {
    const Expression a = gen.make(3);
    const Expression b = gen.make(3);
    const Expression lhs = model::ito_laplacian(sys, constant(2.0) * a - constant(3.0) * b);
    const Expression rhs =
        constant(2.0) * model::ito_laplacian(sys, a) - constant(3.0) * model::ito_laplacian(sys, b);
    EXPECT_LT(sampled_rel_diff(lhs, rhs, 1, 1, -1.5, 1.5, 100), 1e-9) << k;

    const Expression e = expr::substitute(a, drop_w);
    const Expression s = sys.diffusion(0, 0);
    const Expression expected = s * s * expr::differentiate(expr::differentiate(e, X1), X1);
    EXPECT_LT(sampled_rel_diff(model::ito_laplacian(sys, e), expected, 1, 1, -1.5, 1.5, 100), 1e-9) << k;
  }
}

TEST(Laplacian, TwoNoiseCrossTerms) {
  // Hand expansion for n = 2, m = 2 with constant diffusion.
  const expr::VariableSpace sp(2, 2);
  const System sys = System::ito(sp, {P("0", 2, 2), P("0", 2, 2)},
                                 {{P("1", 2, 2), P("2", 2, 2)}, {P("3", 2, 2), P("4", 2, 2)}},
                                 model::Domain::defaults(2, 2));
  const Expression e = P("x1*x2 + w1*x1 + w2^2", 2, 2);
  // k=1: s^1=1, s^2=3 -> 2*1*3*1 + 2*1*1 = 8 ; k=2: s^1=2, s^2=4 -> 2*2*4 + 2 = 18
  EXPECT_LT(sampled_rel_diff(model::ito_laplacian(sys, e), constant(26.0), 2, 2, -2, 2, 50), 1e-12);
}

TEST(Commutator, Examples) {
  const VectorField X = field({"x1*t+x1^2"});
  for (const auto& c : model::commutator(X, X).coeffs) EXPECT_LT(sampled_abs(c, 1, 1, -2, 2), 1e-14);

  const auto br = model::commutator(field({"1"}), field({"x1"}));
  EXPECT_LT(sampled_rel_diff(br.coeffs[0], constant(1.0), 1, 1, -2, 2, 50), 1e-14);

  // Example 4 fields: x-independent coefficients commute.
  const auto ab = model::commutator(field({"exp(0.5*t)", "0.3*exp(-0.3*t)"}, 2, 2),
                                    field({"0.4*exp(0.5*t)", "exp(-0.3*t)"}, 2, 2));
  for (const auto& c : ab.coeffs) EXPECT_TRUE(expr::simplify(c).is_constant(0.0));
}

TEST(Commutator, BilinearAntisymmetricJacobi) {
  const VectorField A = field({"x1*x2", "x2^2 - t"}, 2, 1);
  const VectorField B = field({"x1^2", "3*x1 + x2"}, 2, 1);
  const VectorField C = field({"1 + x2^3", "x1*x2*t"}, 2, 1);
  auto add = [](const VectorField& u, const VectorField& v, double a = 1.0) {
    VectorField r;
    for (int i = 0; i < u.n(); ++i) r.coeffs.push_back(u.coeffs[i] + constant(a) * v.coeffs[i]);
    return r;
  };
  const auto ab = model::commutator(A, B);
  const auto ba = model::commutator(B, A);
  const auto lin = model::commutator(add(A, C, 2.0), B);
  const auto lin2 = add(ab, model::commutator(C, B), 2.0);
  const auto jac = add(add(model::commutator(A, model::commutator(B, C)),
                           model::commutator(B, model::commutator(C, A))),
                       model::commutator(C, model::commutator(A, B)));
  for (int i = 0; i < 2; ++i) {
    EXPECT_LT(sampled_rel_diff(ab.coeffs[i], -ba.coeffs[i], 2, 1, -2, 2, 100), 1e-12);
    EXPECT_LT(sampled_rel_diff(lin.coeffs[i], lin2.coeffs[i], 2, 1, -2, 2, 100), 1e-9);
    EXPECT_LT(sampled_abs(jac.coeffs[i], 2, 1, -2, 2), 1e-9);
  }
}

TEST(Operators, KernelExamples) {
  const System ex7 = scalar_system("x1", "x1", 0.1, 2.1);
  const Expression z = P("x1*exp(-w1-t/2)");
  EXPECT_LT(sampled_abs(model::operator_M(ex7, z), 1, 1, 0.1, 2), 1e-13);
  EXPECT_LT(sampled_abs(model::operator_L(ex7, z), 1, 1, 0.1, 2), 1e-13);

  const System ex8 = scalar_system("1", "x1");
  const Expression zl = P("(x1-2)*exp(t/2)");
  EXPECT_LT(sampled_abs(model::operator_L(ex8, zl), 1, 1, -2, 2), 1e-13);
  EXPECT_GT(sampled_abs(model::operator_M(ex8, zl), 1, 1, -2, 2), 0.1);

  EXPECT_TRUE(expr::simplify(model::operator_L(ex8, constant(4.0))).is_constant(0.0));
  EXPECT_TRUE(expr::simplify(model::operator_M(ex8, constant(4.0))).is_constant(0.0));
}

TEST(Operators, LinearAndLeibniz) {
  const System sys = scalar_system("x1*t - 1", "x1^2 + 1");
  RandomExpr gen(5);
  for (int k = 0; k < 25; ++k) {
    const Expression a = gen.make(3);
    const Expression b = gen.make(3);
    for (auto op : {&model::operator_L, &model::operator_M}) {
      const Expression lin = op(sys, constant(1.5) * a + b);
      EXPECT_LT(sampled_rel_diff(lin, constant(1.5) * op(sys, a) + op(sys, b), 1, 1, -1.5, 1.5, 100), 1e-9);
      // First-order operators: O(ab) = O(a) b + a O(b).
      const Expression prod = op(sys, a * b);
      EXPECT_LT(sampled_rel_diff(prod, op(sys, a) * b + a * op(sys, b), 1, 1, -1.5, 1.5, 100), 1e-9);
    }
  }
}

TEST(Operators, ScalarOnly) {
  const System sys = System::ito(expr::VariableSpace(2, 1), {P("0", 2), P("0", 2)},
                                 {{P("1", 2)}, {P("1", 2)}}, model::Domain::defaults(2, 1));
  try {
    model::operator_L(sys, P("x1", 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Dimension);
  }
}

TEST(System, Invariants) {
  const expr::VariableSpace sp(1, 1);
  try {
    System::ito(sp, {P("1")}, {{P("w1")}}, model::Domain::defaults(1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Invariant);
  }
  EXPECT_NO_THROW(System::generalized(sp, {P("1")}, {{P("w1")}}, model::Domain::defaults(1, 1)));
  EXPECT_THROW(System::ito(sp, {P("1"), P("1")}, {{P("1")}}, model::Domain::defaults(1, 1)), Error);
  EXPECT_TRUE(field({"x1*w1"}).random());
  EXPECT_FALSE(field({"x1*t"}).random());
}

TEST(Sampler, GuardAvoidsPoles) {
  const expr::VariableSpace sp(1, 1);
  const model::Sampler sampler(sp, model::Domain::defaults(1, 1));
  const auto pts = sampler.sample({P("1/(x1-0.5)")}, 200);
  ASSERT_EQ(pts.size(), 200u);
  for (const auto& p : pts) EXPECT_GE(std::abs(p[0] - 0.5), 1e-3);
  const auto logs = sampler.sample({P("log(x1)")}, 100);
  for (const auto& p : logs) EXPECT_GT(p[0], 1e-3);
}

TEST(Coefficients, CompiledMatchesTree) {
  const System sys = scalar_system("exp(-x1) - exp(-2*x1)/2", "exp(-x1)");
  const model::CompiledSystem cs(sys);
  std::vector<double> f(1), s(1), scratch;
  const std::vector<double> slots{0.3, 1.0, 0.2};
  cs.evaluate(slots, f, s, scratch);
  EXPECT_EQ(f[0], std::exp(-0.3) - std::exp(-0.6) / 2);
  EXPECT_EQ(s[0], std::exp(-0.3));
}

}  // namespace
}  // namespace stochsym
