#include "transform/construct.hpp"

#include <cmath>

#include "common/error.hpp"
#include "expr/compiled.hpp"
#include "expr/integrate.hpp"
#include "expr/simplify.hpp"
#include "model/sampler.hpp"
#include "symcheck/compat.hpp"
#include "symcheck/residuals.hpp"
#include "transform/inversion.hpp"
#include "transform/transform.hpp"

namespace stochsym::transform {

using expr::constant;
using expr::differentiate;
using expr::substitute;
using expr::Variable;

namespace {

const Variable Y = Variable::x(1);
const Variable T = Variable::time();
const Variable W = Variable::w(1);

double midpoint(const model::Interval& i) { return 0.5 * (i.lo + i.hi); }

// Sampled check that e does not depend on y; returns the y-free form.
Expression require_y_free(const Expression& e, const model::Domain& domain, const char* what) {
  if (!expr::depends_on(e, Y)) return e;
  const expr::VariableSpace space(1, 1);
  const Expression ey = differentiate(e, Y);
  const auto pts = model::Sampler(space, domain).sample({e, ey}, 200);
  const expr::CompiledBundle b({e, ey}, space);
  std::vector<double> v(2), scratch;
  for (const auto& p : pts) {
    b.evaluate(p, v, scratch);
    if (std::abs(v[1]) > 1e-7 * (1.0 + std::abs(v[0]))) {
      throw Error(ErrorCode::BetaYDependence,
                  std::string(what) + " depends on y (d/dy = " + std::to_string(v[1]) + "): " + expr::to_string(e));
    }
  }
  return expr::simplify(substitute(e, {{Y, constant(midpoint(domain.x[0]))}}));
}

Expression definite(const Expression& antiderivative, Variable v, const Expression& upper) {
  return substitute(antiderivative, {{v, upper}}) - substitute(antiderivative, {{v, constant(0.0)}});
}

// beta_tw = beta_wt, sampled.
void require_consistent(const Expression& rw, const Expression& rt, const model::Domain& domain) {
  const expr::VariableSpace space(1, 1);
  const std::vector<Expression> e{differentiate(rw, T), differentiate(rt, W)};
  const auto pts = model::Sampler(space, domain).sample(e, 200);
  const expr::CompiledBundle b(e, space);
  std::vector<double> v(2), scratch;
  for (const auto& p : pts) {
    b.evaluate(p, v, scratch);
    if (std::abs(v[0] - v[1]) > 1e-7 * (1.0 + std::abs(v[0]) + std::abs(v[1]))) {
      throw Error(ErrorCode::CompatibilityFailed, "beta_tw != beta_wt (" + std::to_string(v[0]) + " vs " +
                                                      std::to_string(v[1]) + ")");
    }
  }
}

BetaResult integrate_beta(Expression rw, Expression rt, const model::Domain& domain, const BetaOptions& opts) {
  require_consistent(rw, rt, domain);
  BetaResult r;
  r.rhs_w = rw;
  r.rhs_t = rt;
  if (!opts.force_grid) {
    const auto aw = expr::integrate_rule_based(rw, W);
    const auto at = expr::integrate_rule_based(expr::simplify(substitute(rt, {{W, constant(0.0)}})), T);
    if (aw && at) {
      const Expression beta =
          expr::simplify(definite(*at, T, expr::var(T)) + definite(*aw, W, expr::var(W)));
      if (const auto ab = expr::integrate_rule_based(beta, W)) {
        const Expression B = expr::simplify(opts.b + constant(opts.c) * expr::var(W) -
                                            definite(*ab, W, expr::var(W)));
        r.beta = beta;
        r.B = B;
        r.additive = std::make_shared<SymbolicAdditive>(B);
        return r;
      }
    }
    r.notes.push_back("no rule-based antiderivative for beta: tabulated on a grid");
  }
  const double w_max = std::max(std::abs(domain.w[0].lo), std::abs(domain.w[0].hi));
  r.additive = std::make_shared<GridAdditive>(rw, rt, opts.b, opts.c, domain.t.hi, w_max);
  r.notes.push_back("beta grid: trapezoid rule, spacing 1e-2");
  return r;
}

}  // namespace

ChangeOfVariables build_phi_from_symmetry(const model::System& sys, const Expression& phi) {
  if (sys.n() != 1 || sys.m() != 1) throw Error(ErrorCode::Dimension, "build_phi_from_symmetry is scalar only");
  symcheck::require_nonvanishing(sys, phi, "phi");
  ChangeOfVariables cov;
  cov.beta = constant(0.0);
  const model::Interval box = sys.domain().x[0];
  const auto xi = expr::integrate_rule_based(expr::simplify(constant(1.0) / phi), Y);
  if (!xi) {
    cov.numeric = ScalarMap::quadrature(phi, midpoint(box), nullptr, box);
    cov.notes.push_back("no rule-based antiderivative of 1/phi: quadrature from y0 = " +
                        std::to_string(midpoint(box)));
    return cov;
  }
  const Expression f = expr::simplify(*xi);
  cov.forward = {f};
  if (const auto inv = invert_scalar(f, sys.domain())) {
    cov.inverse = {*inv};
    if (check_round_trip(cov, sys.space(), sys.domain()).pass) return cov;
    cov.inverse.clear();
  }
  cov.numeric = ScalarMap::symbolic(f, std::nullopt, nullptr, box);
  cov.notes.push_back("no symbolic inverse: numeric root finding");
  return cov;
}

BetaResult solve_beta(const Expression& F, const Expression& S, const Expression& psi,
                      const model::Domain& domain, const BetaOptions& opts) {
  const Expression py = differentiate(psi, Y);
  const Expression rw = expr::simplify(differentiate(psi, W) + S * py);
  const Expression rt = expr::simplify(differentiate(psi, T) + F * py +
                                       constant(0.5) * (S * differentiate(py, W) + S * S * differentiate(py, Y)));
  return integrate_beta(require_y_free(rw, domain, "beta_w"), require_y_free(rt, domain, "beta_t"), domain, opts);
}

BetaResult solve_beta(const model::System& sys, const ChangeOfVariables& xi, const BetaOptions& opts) {
  if (sys.n() != 1 || sys.m() != 1) throw Error(ErrorCode::Dimension, "solve_beta is scalar only");
  const Expression& F = sys.drift(0);
  const Expression& S = sys.diffusion(0, 0);
  if (xi.has_forward()) return solve_beta(F, S, differentiate(xi.forward[0], W), sys.domain(), opts);
  if (!xi.numeric) throw Error(ErrorCode::Usage, "map has no forward part");
  if (xi.numeric->xi()) return solve_beta(F, S, differentiate(*xi.numeric->xi(), W), sys.domain(), opts);
  // Xi = int_{y0}^y g: at y0, psi = psi_t = psi_w = 0, psi_y = g_w, psi_yw = g_ww, psi_yy = g_yw.
  const Expression g = constant(1.0) / *xi.numeric->phi();
  const Expression gw = differentiate(g, W);
  const std::map<Variable, Expression> at{{Y, constant(xi.numeric->y0())}};
  const Expression rw = expr::simplify(substitute(S * gw, at));
  const Expression rt = expr::simplify(substitute(
      F * gw + constant(0.5) * (S * differentiate(gw, W) + S * S * differentiate(gw, Y)), at));
  auto r = integrate_beta(rw, rt, sys.domain(), opts);
  r.notes.push_back("right-hand sides read at y0 (quadrature map)");
  return r;
}

ChangeOfVariables with_beta(const ChangeOfVariables& xi, const BetaResult& beta, const model::Interval& y_box) {
  ChangeOfVariables out = xi;
  out.notes.insert(out.notes.end(), beta.notes.begin(), beta.notes.end());
  if (xi.symbolic() && beta.B) {
    out.forward = {expr::simplify(xi.forward[0] + *beta.B)};
    out.inverse = {expr::simplify(substitute(xi.inverse[0], {{Y, expr::var(Y) - *beta.B}}))};
    out.beta = *beta.B;
    out.numeric = nullptr;
    return out;
  }
  if (xi.numeric && !xi.numeric->xi()) {
    out.numeric = ScalarMap::quadrature(*xi.numeric->phi(), xi.numeric->y0(), beta.additive, y_box);
  } else {
    const Expression f = xi.has_forward() ? xi.forward[0] : *xi.numeric->xi();
    std::optional<Expression> finv;
    if (xi.has_inverse()) finv = xi.inverse[0];
    out.numeric = ScalarMap::symbolic(f, finv, beta.additive, y_box);
  }
  out.forward.clear();
  out.inverse.clear();
  if (beta.B) {
    out.beta = *beta.B;
    if (xi.has_forward()) out.forward = {expr::simplify(xi.forward[0] + *beta.B)};
    else if (xi.numeric && xi.numeric->xi()) out.forward = {expr::simplify(*xi.numeric->xi() + *beta.B)};
  } else {
    out.beta = constant(0.0);
    out.notes.push_back("additive term is numeric (grid)");
  }
  return out;
}

model::VectorField push_forward(const model::VectorField& X, const ChangeOfVariables& cov) {
  if (!cov.symbolic()) throw Error(ErrorCode::Unsupported, "push-forward needs a symbolic map and inverse");
  const int n = cov.n();
  if (X.n() != n) throw Error(ErrorCode::Dimension, "field and map dimensions differ");
  std::map<Variable, Expression> old;
  for (int i = 0; i < n; ++i) old[Variable::x(i + 1)] = cov.inverse[i];
  model::VectorField out;
  for (int i = 0; i < n; ++i) {
    Expression c = constant(0.0);
    for (int j = 0; j < n; ++j) c = c + differentiate(cov.forward[i], Variable::x(j + 1)) * X.coeffs[j];
    out.coeffs.push_back(expr::simplify(substitute(expr::simplify(c), old)));
  }
  return out;
}

symcheck::ResidualReport verify_preservation(const model::System& sys, const model::VectorField& X,
                                             const ChangeOfVariables& cov, const symcheck::CheckOptions& opts) {
  const TransformResult tr =
      (sys.n() == 1 && sys.m() == 1) ? transform_scalar(sys, cov) : transform_system(sys, cov);
  if (!tr.symbolic()) throw Error(ErrorCode::Unsupported, "preservation check needs closed-form coefficients");
  const model::VectorField Xt = push_forward(X, cov);
  const model::System& out = *tr.system;
  auto report = (Xt.random() || out.references_noise()) ? symcheck::random_residuals(out, Xt, opts)
                                                       : symcheck::deterministic_residuals(out, Xt, opts);
  report.check = "preservation";
  std::string shown;
  for (const auto& c : Xt.coeffs) shown += (shown.empty() ? "" : ", ") + expr::to_string(c);
  report.notes.push_back("pushed-forward field: (" + shown + ")");
  report.notes.insert(report.notes.end(), tr.notes.begin(), tr.notes.end());
  return report;
}

}  // namespace stochsym::transform
