#include <gtest/gtest.h>

#include <cmath>

#include "common/error.hpp"
#include "expr/compiled.hpp"
#include "expr/integrate.hpp"
#include "expr/simplify.hpp"
#include "test_support.hpp"

namespace stochsym {
namespace {

using expr::Expression;
using expr::Op;
using expr::Point;
using expr::Variable;
using testing::P;
using testing::RandomExpr;
using testing::sampled_rel_diff;

const Variable X1 = Variable::x(1);
const Variable T = Variable::time();
const Variable W1 = Variable::w(1);

Point at(double x, double t, double w) { return Point{{x}, t, {w}}; }

TEST(Parse, GrammarMapping) {
  Expression e = P("exp(-x1)");
  ASSERT_EQ(e.op(), Op::Exp);
  ASSERT_EQ(e.arg().op(), Op::Neg);
  EXPECT_EQ(e.arg().arg().variable(), X1);

  Expression f = P("x1^2*t + 1/2");
  ASSERT_EQ(f.op(), Op::Add);
  ASSERT_EQ(f.lhs().op(), Op::Mul);
  EXPECT_EQ(f.lhs().lhs().op(), Op::Pow);
  EXPECT_EQ(f.lhs().rhs().variable(), T);
  ASSERT_EQ(f.rhs().op(), Op::Div);
  EXPECT_TRUE(f.rhs().lhs().is_constant(1.0));
  EXPECT_TRUE(f.rhs().rhs().is_constant(2.0));
}

TEST(Parse, RandomDenominator) {
  // t + exp(x1) - w1 + 1, left associative
  Expression e = P("(t+exp(x1)-w1+1)");
  ASSERT_EQ(e.op(), Op::Add);
  EXPECT_TRUE(e.rhs().is_constant(1.0));
  ASSERT_EQ(e.lhs().op(), Op::Sub);
  EXPECT_EQ(e.lhs().rhs().variable(), W1);
  ASSERT_EQ(e.lhs().lhs().op(), Op::Add);
  EXPECT_EQ(e.lhs().lhs().lhs().variable(), T);
  EXPECT_EQ(e.lhs().lhs().rhs().op(), Op::Exp);
  EXPECT_DOUBLE_EQ(expr::evaluate(e, at(0.0, 1.0, 2.0)), 1.0);
}

TEST(Parse, UnaryMinusAndPowers) {
  EXPECT_DOUBLE_EQ(expr::evaluate(P("-x1^2"), at(3, 0, 0)), -9.0);
  EXPECT_DOUBLE_EQ(expr::evaluate(P("x1^-2"), at(2, 0, 0)), 0.25);
  EXPECT_DOUBLE_EQ(expr::evaluate(P("-2^2"), at(0, 0, 0)), -4.0);
  EXPECT_DOUBLE_EQ(expr::evaluate(P("(-2)^2"), at(0, 0, 0)), 4.0);
  EXPECT_DOUBLE_EQ(expr::evaluate(P("2*-x1"), at(3, 0, 0)), -6.0);
  EXPECT_DOUBLE_EQ(expr::evaluate(P("1.5e-1 * 2E2"), at(0, 0, 0)), 30.0);
  EXPECT_TRUE(P("-3").is_constant(-3.0));
  EXPECT_DOUBLE_EQ(expr::evaluate(P("  x1 *\tt "), at(2, 3, 0)), 6.0);
}

TEST(Parse, SyntaxErrorsCarryPosition) {
  try {
    P("x1 + * t");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.column(), 6);
  }
  EXPECT_THROW(P("exp x1"), ParseError);
  EXPECT_THROW(P("(x1 + t"), ParseError);
  EXPECT_THROW(P(""), ParseError);
  EXPECT_THROW(P("x1 $ 2"), ParseError);
  try {
    expr::parse("x1+", expr::VariableSpace(1, 1), 7, 10);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7);
    EXPECT_EQ(e.column(), 13);
  }
}

TEST(Parse, UnknownVariables) {
  try {
    P("x2 + t");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownVariable);
  }
  EXPECT_THROW(P("y"), Error);
  EXPECT_THROW(P("w2"), Error);
  EXPECT_THROW(P("x0"), Error);
  EXPECT_NO_THROW(P("x2 + w3", 2, 3));
}

TEST(Differentiate, Examples) {
  Expression d = expr::differentiate(P("exp(-x1)"), X1);
  EXPECT_LT(sampled_rel_diff(d, P("-exp(-x1)"), 1, 1, -2, 2, 50), 1e-15);

  Expression dt = expr::simplify(expr::differentiate(P("t^2/2"), T));
  EXPECT_EQ(expr::to_string(dt), "t");

  Expression e = P("exp(t/2-w1)*x1");
  Expression dw = expr::differentiate(e, W1);
  EXPECT_LT(sampled_rel_diff(dw, P("-exp(t/2-w1)*x1"), 1, 1, -2, 2, 50), 1e-15);
  const double h = 1e-5;
  for (int i = 0; i < 50; ++i) {
    Point p = testing::box_point(i, 1, 1, -2, 2);
    Point hi = p, lo = p;
    hi.w[0] += h;
    lo.w[0] -= h;
    const double fd = (expr::evaluate(e, hi) - expr::evaluate(e, lo)) / (2 * h);
    const double exact = expr::evaluate(dw, p);
    EXPECT_LT(std::abs(fd - exact) / std::max(1.0, std::abs(exact)), 1e-6);
  }
}

// Every node type, random trees: symbolic derivative vs central differences
// with h = 1e-5 at 100 points. The error is measured relative to max(1, |d|).
TEST(Differentiate, MatchesCentralDifferences) {
  RandomExpr gen(2024);
  const double h = 1e-5;
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Expression e = gen.make(4);
    for (Variable v : {X1, T, W1}) {
      Expression d = expr::differentiate(e, v);
      for (int i = 0; i < 100; ++i) {
        Point p = testing::box_point(i + 100 * trial, 1, 1, -1.5, 1.5);
        Point hi = p, lo = p;
        auto bump = [&](Point& q, double s) {
          if (v == X1) q.x[0] += s;
          else if (v == T) q.t += s;
          else q.w[0] += s;
        };
        bump(hi, h);
        bump(lo, -h);
        const double f_hi = expr::evaluate_or_nan(e, hi);
        const double f_lo = expr::evaluate_or_nan(e, lo);
        const double exact = expr::evaluate_or_nan(d, p);
        if (!std::isfinite(f_hi) || !std::isfinite(f_lo) || !std::isfinite(exact)) continue;
        if (std::abs(expr::evaluate_or_nan(e, p)) > 1e4) continue;  // FD roundoff dominates
        const double fd = (f_hi - f_lo) / (2 * h);
        ASSERT_LT(std::abs(fd - exact) / std::max(1.0, std::abs(exact)), 1e-6)
            << expr::to_string(e) << " d/d" << v.name() << " at point " << i;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 10000);
}

TEST(Differentiate, GeneralPower) {
  Expression e = P("x1^t");
  Expression d = expr::differentiate(e, X1);
  EXPECT_NEAR(expr::evaluate(d, at(2, 3, 0)), 12.0, 1e-12);
  Expression dt = expr::differentiate(e, T);
  EXPECT_NEAR(expr::evaluate(dt, at(2, 3, 0)), 8.0 * std::log(2.0), 1e-12);
}

TEST(Evaluate, Examples) {
  EXPECT_EQ(expr::evaluate(P("exp(-x1)"), at(0, 0, 0)), 1.0);
  EXPECT_EQ(expr::evaluate(P("1/(1+x1^2)"), at(1, 0, 0)), 0.5);
  // e^0 (1+1)^2 / 8 * (-4 + 1*(3+2-1)) = 0
  Expression drift = P("exp(-t)*(1+x1^2)^2/(8*x1^3)*(-4*x1^2 + exp(t)*(3*x1^4+2*x1^2-1))");
  EXPECT_EQ(expr::evaluate(drift, at(1, 0, 0)), 0.0);
  EXPECT_NEAR(expr::evaluate(drift, at(2, 0, 0)), 25.0 / 64.0 * (-16.0 + 55.0), 1e-12);
}

TEST(Evaluate, DomainErrorsNameTheSubexpression) {
  try {
    expr::evaluate(P("t + log(x1 - 1)"), at(0.5, 0, 0));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.subexpression(), "log(x1-1)");
    EXPECT_EQ(e.code(), ErrorCode::Domain);
  }
  EXPECT_THROW(expr::evaluate(P("1/(x1-1)"), at(1, 0, 0)), DomainError);
  EXPECT_THROW(expr::evaluate(P("sqrt(x1)"), at(-1, 0, 0)), DomainError);
  EXPECT_THROW(expr::evaluate(P("x1^0.5"), at(-1, 0, 0)), DomainError);
  EXPECT_THROW(expr::evaluate(P("exp(x1)"), at(1000, 0, 0)), DomainError);
  EXPECT_TRUE(std::isnan(expr::evaluate_or_nan(P("log(x1)"), at(0, 0, 0))));
  EXPECT_THROW(expr::evaluate(P("x1"), Point{{}, 0, {}}), Error);
}

TEST(Evaluate, Deterministic) {
  RandomExpr gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    Expression e = gen.make(5);
    for (int i = 0; i < 20; ++i) {
      Point p = testing::box_point(i, 1, 1, -2, 2);
      const double a = expr::evaluate_or_nan(e, p);
      const double b = expr::evaluate_or_nan(e, p);
      if (std::isnan(a)) {
        EXPECT_TRUE(std::isnan(b));
      } else {
        EXPECT_EQ(std::bit_cast<std::uint64_t>(a), std::bit_cast<std::uint64_t>(b));
      }
    }
  }
}

TEST(Compiled, MatchesTreeEvaluationBitwise) {
  RandomExpr gen(99);
  expr::VariableSpace space(1, 1);
  for (int trial = 0; trial < 40; ++trial) {
    Expression e = gen.make(5);
    expr::CompiledExpression c(e, space);
    for (int i = 0; i < 30; ++i) {
      Point p = testing::box_point(i, 1, 1, -2, 2);
      const double tree = expr::evaluate_or_nan(e, p);
      const double fast = c(p.slots());
      if (std::isnan(tree)) continue;
      EXPECT_EQ(std::bit_cast<std::uint64_t>(tree), std::bit_cast<std::uint64_t>(fast))
          << expr::to_string(e);
    }
  }
}

TEST(Compiled, BundleSharesWork) {
  expr::VariableSpace space(1, 1);
  Expression base = P("exp(x1*t)+sin(w1)");
  expr::CompiledBundle bundle({base * base, base + P("1"), base}, space);
  std::vector<double> scratch;
  double out[3];
  Point p = at(0.3, 0.7, -0.2);
  bundle.evaluate(p.slots(), out, scratch);
  const double b = expr::evaluate(base, p);
  EXPECT_EQ(out[0], b * b);
  EXPECT_EQ(out[1], b + 1.0);
  EXPECT_EQ(out[2], b);
  EXPECT_LE(bundle.instruction_count(), 10u);
  expr::CompiledExpression bad(P("log(x1)"), space);
  EXPECT_TRUE(std::isnan(bad(at(-1, 0, 0).slots())));
}

TEST(Simplify, Examples) {
  EXPECT_EQ(expr::to_string(expr::simplify(P("x1 + 0"))), "x1");
  EXPECT_EQ(expr::to_string(expr::simplify(P("exp(x1)*exp(-x1)"))), "1");
  Expression s = expr::simplify(P("1*(t^2/2) + 0*w1"));
  EXPECT_EQ(expr::to_string(s), "t^2/2");
  EXPECT_EQ(expr::to_string(expr::simplify(P("x1 - x1"))), "0");
  EXPECT_EQ(expr::to_string(expr::simplify(P("log(exp(t))"))), "t");
  EXPECT_EQ(expr::to_string(expr::simplify(P("exp(log(x1))"))), "x1");
  EXPECT_EQ(expr::to_string(expr::simplify(P("(exp(-x1) - exp(-2*x1)/2)*exp(x1) + exp(-2*x1)*exp(x1)/2"))), "1");
  EXPECT_EQ(expr::to_string(expr::simplify(P("x1/(2*x1)"))), "0.5");
}

TEST(Simplify, PreservesValueAndIsIdempotent) {
  RandomExpr gen(31337);
  for (int trial = 0; trial < 150; ++trial) {
    Expression e = gen.make(4);
    Expression s = expr::simplify(e);
    int valid = 0;
    EXPECT_LT(sampled_rel_diff(s, e, 1, 1, -2, 2, 200, &valid), 1e-9)
        << expr::to_string(e) << "  ->  " << expr::to_string(s);
    Expression s2 = expr::simplify(s);
    EXPECT_TRUE(expr::structurally_equal(s, s2))
        << expr::to_string(s) << "  vs  " << expr::to_string(s2);
  }
}

TEST(Print, ParsePrintRoundTrip) {
  RandomExpr gen(4242);
  expr::VariableSpace space(1, 1);
  for (int trial = 0; trial < 150; ++trial) {
    Expression e = trial % 2 ? gen.make(5) : expr::simplify(gen.make(4));
    Expression back = expr::parse(expr::to_string(e), space);
    for (int i = 0; i < 100; ++i) {
      Point p = testing::box_point(i, 1, 1, -2, 2);
      const double a = expr::evaluate_or_nan(e, p);
      const double b = expr::evaluate_or_nan(back, p);
      if (std::isnan(a)) {
        EXPECT_TRUE(std::isnan(b));
        continue;
      }
      ASSERT_EQ(a, b) << expr::to_string(e);
    }
  }
}

TEST(Print, ExactLiterals) {
  Expression e = expr::constant(0.1) * expr::var(X1) + expr::constant(1.0 / 3.0);
  Expression back = P(expr::to_string(e));
  EXPECT_TRUE(expr::structurally_equal(e, back));
}

TEST(Substitute, Simultaneous) {
  Expression e = P("x1 + 2*w1");
  Expression s = expr::substitute(e, {{X1, P("w1")}, {W1, P("x1")}});
  EXPECT_EQ(expr::evaluate(s, at(1, 0, 10)), 12.0);
}

TEST(Integrate, Examples) {
  auto ey = expr::integrate_rule_based(P("exp(x1)"), X1);
  ASSERT_TRUE(ey);
  EXPECT_EQ(expr::to_string(*ey), "exp(x1)");

  auto inv = expr::integrate_rule_based(P("-2*x1/(1+x1^2)^2"), X1);
  ASSERT_TRUE(inv);
  EXPECT_LT(sampled_rel_diff(*inv, P("1/(1+x1^2)"), 1, 1, -2, 2, 100), 1e-12);

  auto c = expr::integrate_rule_based(P("3*t"), X1);
  ASSERT_TRUE(c);
  EXPECT_LT(sampled_rel_diff(*c, P("3*t*x1"), 1, 1, -2, 2, 100), 1e-15);
}

TEST(Integrate, RuleTable) {
  const char* cases[] = {
      "x1^3",          "1/x1",         "1/(2*x1+1)",        "exp(2*x1+t)",     "sin(3*x1)",
      "cos(x1)*t",     "x1*exp(x1^2)", "(t+exp(x1)-w1+1)/exp(-x1)", "exp(w1+t/2)/x1^2",
      "x1^2 - 3*x1 + 2", "2*x1*(x1^2+1)^(1/2)", "exp(t)", "cos(x1)*sin(x1)^2", "w1 - t",
  };
  for (const char* text : cases) {
    Expression e = P(text);
    auto a = expr::integrate_rule_based(e, X1);
    ASSERT_TRUE(a) << text;
    Expression back = expr::differentiate(*a, X1);
    EXPECT_LT(sampled_rel_diff(back, e, 1, 1, 0.1, 1.9, 100), 1e-9) << text;
  }
}

TEST(Integrate, Example6Antiderivative) {
  auto a = expr::integrate_rule_based(P("(t+exp(x1)-w1+1)/exp(-x1)"), X1);
  ASSERT_TRUE(a);
  EXPECT_LT(sampled_rel_diff(*a, P("exp(x1)*(t-w1+1)+exp(2*x1)/2"), 1, 1, -2, 2, 200), 1e-12);
}

TEST(Integrate, NotFound) {
  EXPECT_FALSE(expr::integrate_rule_based(P("exp(x1^2)"), X1));
  EXPECT_FALSE(expr::integrate_rule_based(P("1/(1+exp(x1))"), X1));
  EXPECT_FALSE(expr::integrate_rule_based(P("sin(x1)/x1"), X1));
}

TEST(Integrate, ReturnedAntiderivativesDifferentiateBack) {
  RandomExpr gen(5);
  int found = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Expression e = gen.make(3);
    auto a = expr::integrate_rule_based(e, X1);
    if (!a) continue;
    ++found;
    int valid = 0;
    const double err = sampled_rel_diff(expr::differentiate(*a, X1), e, 1, 1, 0.2, 1.8, 60, &valid);
    EXPECT_LT(err, 1e-9) << expr::to_string(e) << " -> " << expr::to_string(*a);
  }
  EXPECT_GT(found, 40);
}

}  // namespace
}  // namespace stochsym
