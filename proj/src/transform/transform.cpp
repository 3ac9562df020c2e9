#include "transform/transform.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "common/error.hpp"
#include "expr/compiled.hpp"
#include "expr/simplify.hpp"
#include "model/operators.hpp"
#include "model/sampler.hpp"

namespace stochsym::transform {

using expr::constant;
using expr::differentiate;
using expr::Variable;
using model::System;

namespace {

constexpr double kDetFloor = 1e-6;
constexpr double kVerifyTol = 1e-7;

std::map<Variable, Expression> old_in_terms_of_new(const std::vector<Expression>& inverse) {
  std::map<Variable, Expression> sub;
  for (std::size_t i = 0; i < inverse.size(); ++i) sub[Variable::x(static_cast<int>(i) + 1)] = inverse[i];
  return sub;
}

TransformResult finish(const expr::VariableSpace& space, std::vector<Expression> drift,
                       std::vector<std::vector<Expression>> diffusion, model::Domain domain) {
  bool noise = false;
  for (auto& e : drift) {
    e = expr::simplify(e);
    noise = noise || expr::depends_on_kind(e, expr::VarKind::Noise);
  }
  for (auto& row : diffusion) {
    for (auto& e : row) {
      e = expr::simplify(e);
      noise = noise || expr::depends_on_kind(e, expr::VarKind::Noise);
    }
  }
  TransformResult r;
  r.system = noise ? System::generalized(space, std::move(drift), std::move(diffusion), domain)
                   : System::ito(space, std::move(drift), std::move(diffusion), domain);
  r.coefficients = std::make_shared<model::CompiledSystem>(*r.system);
  r.domain = std::move(domain);
  if (noise) r.notes.push_back("transformed coefficients depend on w (not an Ito equation)");
  return r;
}

// Relations the new coefficients must satisfy with old = G(new):
//   J s_new - (s(G) - G_w) = 0,  G_t + J f_new + Delta_new(G)/2 - f(G) = 0.
std::vector<Expression> inverse_relations(const System& sys, const std::vector<Expression>& G,
                                          const System& out) {
  const int n = sys.n();
  const int m = sys.m();
  const auto sub = old_in_terms_of_new(G);
  std::vector<Expression> rel;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < m; ++k) {
      Expression lhs = differentiate(G[i], Variable::w(k + 1));
      for (int j = 0; j < n; ++j) lhs = lhs + differentiate(G[i], Variable::x(j + 1)) * out.diffusion(j, k);
      rel.push_back(lhs - expr::substitute(sys.diffusion(i, k), sub));
    }
    Expression lhs = differentiate(G[i], Variable::time()) + constant(0.5) * model::ito_laplacian(out, G[i]);
    for (int j = 0; j < n; ++j) lhs = lhs + differentiate(G[i], Variable::x(j + 1)) * out.drift(j);
    rel.push_back(lhs - expr::substitute(sys.drift(i), sub));
  }
  return rel;
}

void verify_relations(const System& sys, const std::vector<Expression>& G, const System& out,
                      TransformResult& r) {
  const auto rel = inverse_relations(sys, G, out);
  std::vector<Expression> all(rel);
  for (const auto& row : out.coefficients()) all.push_back(row);
  const model::Sampler sampler(out.space(), out.domain());
  const auto pts = sampler.sample(all, 100);
  const expr::CompiledBundle b(all, out.space());
  std::vector<double> v(all.size()), scratch;
  double worst = 0.0, scale = 0.0;
  for (const auto& p : pts) {
    b.evaluate(p, v, scratch);
    for (std::size_t j = 0; j < rel.size(); ++j) worst = std::max(worst, std::abs(v[j]));
    for (std::size_t j = rel.size(); j < v.size(); ++j) scale = std::max(scale, std::abs(v[j]));
  }
  r.notes.push_back("inverse-map relations verified at " + std::to_string(pts.size()) +
                    " points, max residual " + std::to_string(worst));
  if (pts.empty() || worst > kVerifyTol * (1.0 + scale)) {
    throw Error(ErrorCode::Internal, "transformed coefficients fail the inverse-map relations (residual " +
                                         std::to_string(worst) + ")");
  }
}

void check_jacobian(const System& sys, const ChangeOfVariables& cov) {
  const int n = sys.n();
  std::vector<std::vector<Expression>> J(n, std::vector<Expression>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) J[i][j] = differentiate(cov.forward[i], Variable::x(j + 1));
  }
  std::vector<Expression> flat;
  for (const auto& row : J) flat.insert(flat.end(), row.begin(), row.end());
  const model::Sampler sampler(sys.space(), sys.domain());
  const auto pts = sampler.sample(flat, 200);
  const expr::CompiledBundle b(flat, sys.space());
  std::vector<double> v(flat.size()), scratch;
  double min_det = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    b.evaluate(p, v, scratch);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) M(i, j) = v[i * n + j];
    }
    min_det = std::min(min_det, std::abs(M.determinant()));
  }
  if (pts.empty() || !(min_det > kDetFloor)) {
    throw Error(ErrorCode::SingularJacobian,
                "Jacobian of the map is singular on the domain (min |det| = " + std::to_string(min_det) + ")");
  }
}

// Route A: Ito rule on the forward map, then substitute old = inverse(new).
std::pair<std::vector<Expression>, std::vector<std::vector<Expression>>> ito_rule(const System& sys,
                                                                                   const ChangeOfVariables& cov) {
  const int n = sys.n();
  const int m = sys.m();
  const auto sub = old_in_terms_of_new(cov.inverse);
  std::vector<Expression> drift(n);
  std::vector<std::vector<Expression>> diffusion(n, std::vector<Expression>(m));
  for (int i = 0; i < n; ++i) {
    const Expression& P = cov.forward[i];
    Expression f = differentiate(P, Variable::time()) + constant(0.5) * model::ito_laplacian(sys, P);
    for (int j = 0; j < n; ++j) f = f + sys.drift(j) * differentiate(P, Variable::x(j + 1));
    drift[i] = expr::simplify(expr::substitute(expr::simplify(f), sub));
    for (int k = 0; k < m; ++k) {
      Expression s = differentiate(P, Variable::w(k + 1));
      for (int j = 0; j < n; ++j) s = s + sys.diffusion(j, k) * differentiate(P, Variable::x(j + 1));
      diffusion[i][k] = expr::simplify(expr::substitute(expr::simplify(s), sub));
    }
  }
  return {drift, diffusion};
}

// Route B: solve the inverse-map relations with a symbolic matrix inverse.
std::pair<std::vector<Expression>, std::vector<std::vector<Expression>>> cofactor_route(
    const System& sys, const std::vector<Expression>& G, const model::Domain& domain) {
  const int n = sys.n();
  const int m = sys.m();
  const auto sub = old_in_terms_of_new(G);
  std::vector<std::vector<Expression>> J(n, std::vector<Expression>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) J[i][j] = expr::simplify(differentiate(G[i], Variable::x(j + 1)));
  }
  const auto Jinv = cofactor_inverse(J);
  std::vector<std::vector<Expression>> diffusion(n, std::vector<Expression>(m));
  for (int k = 0; k < m; ++k) {
    std::vector<Expression> rhs(n);
    for (int j = 0; j < n; ++j) {
      rhs[j] = expr::substitute(sys.diffusion(j, k), sub) - differentiate(G[j], Variable::w(k + 1));
    }
    for (int i = 0; i < n; ++i) {
      Expression s = constant(0.0);
      for (int j = 0; j < n; ++j) s = s + Jinv[i][j] * rhs[j];
      diffusion[i][k] = expr::simplify(s);
    }
  }
  std::vector<Expression> zero(n, constant(0.0));
  const System tmp = System::generalized(sys.space(), zero, diffusion, domain);
  std::vector<Expression> rhs(n);
  for (int j = 0; j < n; ++j) {
    rhs[j] = expr::substitute(sys.drift(j), sub) - differentiate(G[j], Variable::time()) -
             constant(0.5) * model::ito_laplacian(tmp, G[j]);
  }
  std::vector<Expression> drift(n);
  for (int i = 0; i < n; ++i) {
    Expression f = constant(0.0);
    for (int j = 0; j < n; ++j) f = f + Jinv[i][j] * rhs[j];
    drift[i] = expr::simplify(f);
  }
  return {drift, diffusion};
}

// Route B evaluated numerically point by point (any n).
std::shared_ptr<const model::CoefficientModel> numeric_route(const System& sys, const std::vector<Expression>& G) {
  const int n = sys.n();
  const int m = sys.m();
  const auto sub = old_in_terms_of_new(G);
  // Layout: J (n*n), G_t (n), G_w (n*m), G_ww summed over k (n),
  // G_jl (n*n*n), G_j w_k (n*n*m), f(G) (n), s(G) (n*m).
  std::vector<Expression> e;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) e.push_back(differentiate(G[i], Variable::x(j + 1)));
  }
  for (int i = 0; i < n; ++i) e.push_back(differentiate(G[i], Variable::time()));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < m; ++k) e.push_back(differentiate(G[i], Variable::w(k + 1)));
  }
  for (int i = 0; i < n; ++i) {
    Expression s = constant(0.0);
    for (int k = 0; k < m; ++k) s = s + differentiate(differentiate(G[i], Variable::w(k + 1)), Variable::w(k + 1));
    e.push_back(s);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < n; ++l) {
        e.push_back(differentiate(differentiate(G[i], Variable::x(j + 1)), Variable::x(l + 1)));
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < m; ++k) {
        e.push_back(differentiate(differentiate(G[i], Variable::x(j + 1)), Variable::w(k + 1)));
      }
    }
  }
  for (int i = 0; i < n; ++i) e.push_back(expr::substitute(sys.drift(i), sub));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < m; ++k) e.push_back(expr::substitute(sys.diffusion(i, k), sub));
  }
  auto bundle = std::make_shared<expr::CompiledBundle>(e, sys.space());
  auto fn = [bundle, n, m](std::span<const double> slots, std::span<double> f, std::span<double> sigma,
                           std::vector<double>& scratch) {
    thread_local std::vector<double> v;
    v.resize(bundle->size());
    bundle->evaluate(slots, v, scratch);
    std::size_t o = 0;
    Eigen::MatrixXd J(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) J(i, j) = v[o++];
    }
    Eigen::VectorXd Gt(n);
    for (int i = 0; i < n; ++i) Gt[i] = v[o++];
    Eigen::MatrixXd Gw(n, m);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < m; ++k) Gw(i, k) = v[o++];
    }
    Eigen::VectorXd Gww(n);
    for (int i = 0; i < n; ++i) Gww[i] = v[o++];
    const std::size_t hess = o;
    o += static_cast<std::size_t>(n) * n * n;
    const std::size_t mixed = o;
    o += static_cast<std::size_t>(n) * n * m;
    Eigen::VectorXd fG(n);
    for (int i = 0; i < n; ++i) fG[i] = v[o++];
    Eigen::MatrixXd sG(n, m);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < m; ++k) sG(i, k) = v[o++];
    }
    const auto lu = J.partialPivLu();
    const Eigen::MatrixXd S = lu.solve(sG - Gw);
    Eigen::VectorXd lap = Gww;
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < m; ++k) {
        for (int j = 0; j < n; ++j) {
          lap[i] += 2.0 * S(j, k) * v[mixed + (static_cast<std::size_t>(i) * n + j) * m + k];
          for (int l = 0; l < n; ++l) {
            lap[i] += S(j, k) * S(l, k) * v[hess + (static_cast<std::size_t>(i) * n + j) * n + l];
          }
        }
      }
    }
    const Eigen::VectorXd F = lu.solve(fG - Gt - 0.5 * lap);
    for (int i = 0; i < n; ++i) {
      f[i] = F[i];
      for (int k = 0; k < m; ++k) sigma[static_cast<std::size_t>(i) * m + k] = S(i, k);
    }
  };
  return std::make_shared<model::NumericSystem>(n, m, fn, "numeric (per-point linear solve of the inverse map)");
}

// Numeric scalar transform through a ScalarMap.
std::shared_ptr<const model::CoefficientModel> numeric_scalar(const System& sys,
                                                              std::shared_ptr<const ScalarMap> map) {
  auto old = std::make_shared<model::CompiledSystem>(sys);
  auto fn = [old, map](std::span<const double> slots, std::span<double> f, std::span<double> sigma,
                       std::vector<double>& scratch) {
    const double t = slots[1];
    const double w = slots[2];
    double y;
    try {
      y = map->inverse(slots[0], t, w);
    } catch (const Error&) {
      f[0] = sigma[0] = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    const double old_slots[3] = {y, t, w};
    double fo, so;
    old->evaluate(old_slots, std::span<double>(&fo, 1), std::span<double>(&so, 1), scratch);
    const auto j = map->jet(y, t, w);
    f[0] = j.t + fo * j.y + 0.5 * (j.ww + 2.0 * so * j.yw + so * so * j.yy);
    sigma[0] = j.w + so * j.y;
  };
  return std::make_shared<model::NumericSystem>(1, 1, fn, "numeric (" + map->describe() + ")");
}

}  // namespace

Expression determinant(const std::vector<std::vector<Expression>>& J) {
  const std::size_t n = J.size();
  if (n == 1) return J[0][0];
  if (n == 2) return J[0][0] * J[1][1] - J[0][1] * J[1][0];
  if (n == 3) {
    return J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) - J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
           J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
  }
  throw Error(ErrorCode::Unsupported, "symbolic determinant is limited to n <= 3");
}

std::vector<std::vector<Expression>> cofactor_inverse(const std::vector<std::vector<Expression>>& J) {
  const int n = static_cast<int>(J.size());
  const Expression det = expr::simplify(determinant(J));
  std::vector<std::vector<Expression>> inv(n, std::vector<Expression>(n));
  if (n == 1) {
    inv[0][0] = constant(1.0) / det;
    return inv;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // inv[i][j] = cofactor C_ji / det
      std::vector<std::vector<Expression>> minor;
      for (int r = 0; r < n; ++r) {
        if (r == j) continue;
        std::vector<Expression> row;
        for (int c = 0; c < n; ++c) {
          if (c != i) row.push_back(J[r][c]);
        }
        minor.push_back(std::move(row));
      }
      Expression cof = determinant(minor);
      if ((i + j) % 2 == 1) cof = -cof;
      inv[i][j] = expr::simplify(cof / det);
    }
  }
  return inv;
}

TransformResult transform_scalar(const System& sys, const ChangeOfVariables& cov, Direction direction) {
  if (sys.n() != 1 || sys.m() != 1) throw Error(ErrorCode::Dimension, "transform_scalar needs n = m = 1");
  if (cov.n() != 1) throw Error(ErrorCode::Dimension, "map dimension does not match the system");
  require_monotone(cov, sys);
  model::Domain domain = image_domain(cov, sys.space(), sys.domain());

  if (direction == Direction::Backward) {
    if (!cov.has_inverse()) throw Error(ErrorCode::Inversion, "backward transform needs a symbolic inverse");
    const Expression& G = cov.inverse[0];
    const Variable y = Variable::x(1);
    const Variable w = Variable::w(1);
    const auto sub = old_in_terms_of_new(cov.inverse);
    const Expression Gy = differentiate(G, y);
    const Expression S =
        expr::simplify((expr::substitute(sys.diffusion(0, 0), sub) - differentiate(G, w)) / Gy);
    const Expression lap = differentiate(differentiate(G, w), w) +
                           constant(2.0) * S * differentiate(differentiate(G, y), w) +
                           S * S * differentiate(Gy, y);
    const Expression F = (expr::substitute(sys.drift(0), sub) - differentiate(G, Variable::time()) -
                          constant(0.5) * lap) /
                         Gy;
    auto r = finish(sys.space(), {F}, {{S}}, domain);
    r.notes.push_back("backward formula on the inverse map");
    return r;
  }

  if (cov.symbolic()) {
    auto [drift, diffusion] = ito_rule(sys, cov);
    auto r = finish(sys.space(), std::move(drift), std::move(diffusion), domain);
    verify_relations(sys, cov.inverse, *r.system, r);
    return r;
  }

  std::shared_ptr<const ScalarMap> map = cov.numeric;
  if (!map) {
    if (!cov.has_forward()) throw Error(ErrorCode::Usage, "map has no forward part");
    map = ScalarMap::symbolic(cov.forward[0], std::nullopt, nullptr, sys.domain().x[0]);
  }
  TransformResult r;
  r.coefficients = numeric_scalar(sys, map);
  r.domain = domain;
  r.notes.push_back("inverse map has no closed form: coefficients are numeric only (" + map->describe() + ")");
  return r;
}

TransformResult transform_system(const System& sys, const ChangeOfVariables& cov) {
  const int n = sys.n();
  if (cov.n() != n) throw Error(ErrorCode::Dimension, "map dimension does not match the system");
  if (n == 1 && sys.m() == 1 && !cov.symbolic()) return transform_scalar(sys, cov);
  if (!cov.has_inverse()) {
    throw Error(ErrorCode::Inversion, "system maps need a symbolic inverse");
  }
  model::Domain domain = sys.domain();
  if (cov.has_forward()) {
    check_jacobian(sys, cov);
    domain = image_domain(cov, sys.space(), sys.domain());
  }

  if (cov.has_forward()) {
    auto [drift, diffusion] = ito_rule(sys, cov);
    auto r = finish(sys.space(), std::move(drift), std::move(diffusion), domain);
    verify_relations(sys, cov.inverse, *r.system, r);
    return r;
  }
  if (n <= 3) {
    auto [drift, diffusion] = cofactor_route(sys, cov.inverse, domain);
    auto r = finish(sys.space(), std::move(drift), std::move(diffusion), domain);
    r.notes.push_back("no forward map: new-coordinate box copied from the old one");
    verify_relations(sys, cov.inverse, *r.system, r);
    return r;
  }
  TransformResult r;
  r.coefficients = numeric_route(sys, cov.inverse);
  r.domain = domain;
  r.notes.push_back("n > 3 without a forward map: coefficients are numeric only");
  return r;
}

}  // namespace stochsym::transform
