#include "transform/scalar_map.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>

#include "common/error.hpp"
#include "expr/simplify.hpp"

namespace stochsym::transform {

using expr::differentiate;
using expr::Variable;

namespace {

const expr::VariableSpace kScalar(1, 1);
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Expression> derivative_set(const Expression& e, std::initializer_list<std::vector<Variable>> paths) {
  std::vector<Expression> out;
  for (const auto& path : paths) {
    Expression d = e;
    for (Variable v : path) d = differentiate(d, v);
    out.push_back(expr::simplify(d));
  }
  return out;
}

const Variable Y = Variable::x(1);
const Variable T = Variable::time();
const Variable W = Variable::w(1);

}  // namespace

SymbolicAdditive::SymbolicAdditive(Expression b)
    : b_(std::move(b)), bundle_(derivative_set(b_, {{}, {T}, {W}, {W, W}}), kScalar) {
  if (expr::depends_on_kind(b_, expr::VarKind::State)) {
    throw Error(ErrorCode::Invariant, "additive term must not depend on the state variable");
  }
}

AdditiveTerm::Values SymbolicAdditive::at(double t, double w) const {
  thread_local std::vector<double> scratch;
  double out[4];
  const double slots[3] = {0.0, t, w};
  bundle_.evaluate(slots, out, scratch);
  return {out[0], out[1], out[2], out[3]};
}

GridAdditive::GridAdditive(const Expression& rw, const Expression& rt, const Expression& b_of_t, double c,
                           double t_max, double w_max, double h)
    : h_(h),
      nt_(static_cast<int>(std::ceil(t_max / h)) + 1),
      nw_(static_cast<int>(std::ceil(w_max / h))),
      rw_(rw, kScalar),
      b_(derivative_set(b_of_t, {{}, {T}}), kScalar),
      c_(c) {
  if (expr::depends_on_kind(rw, expr::VarKind::State) || expr::depends_on_kind(rt, expr::VarKind::State)) {
    throw Error(ErrorCode::BetaYDependence, "beta right-hand sides must not depend on the state variable");
  }
  const expr::CompiledExpression rt_c(rt, kScalar);
  const int width = 2 * nw_ + 1;
  B_.assign(static_cast<std::size_t>(nt_) * width, 0.0);
  Bt_.assign(B_.size(), 0.0);
  beta_.assign(B_.size(), 0.0);
  auto idx = [&](int i, int j) { return static_cast<std::size_t>(i) * width + j; };
  std::vector<double> rw_row(width), rt_row(width);
  double g = 0.0;  // int_0^t rt(s, 0) ds
  double rt_prev = 0.0;
  for (int i = 0; i < nt_; ++i) {
    const double t = i * h_;
    for (int j = 0; j < width; ++j) {
      const double slots[3] = {0.0, t, (j - nw_) * h_};
      rw_row[j] = rw_(slots);
      rt_row[j] = rt_c(slots);
    }
    if (i > 0) g += 0.5 * h_ * (rt_prev + rt_row[nw_]);
    rt_prev = rt_row[nw_];
    beta_[idx(i, nw_)] = g;
    // March outwards from w = 0 in both directions.
    for (int dir : {1, -1}) {
      for (int j = nw_ + dir; j >= 0 && j < width; j += dir) {
        const int p = j - dir;
        const double step = dir * h_;
        beta_[idx(i, j)] = beta_[idx(i, p)] + 0.5 * step * (rw_row[p] + rw_row[j]);
        B_[idx(i, j)] = B_[idx(i, p)] - 0.5 * step * (beta_[idx(i, p)] + beta_[idx(i, j)]);
        Bt_[idx(i, j)] = Bt_[idx(i, p)] - 0.5 * step * (rt_row[p] + rt_row[j]);
      }
    }
  }
}

double GridAdditive::interp(const std::vector<double>& grid, double t, double w) const {
  const double ti = t / h_;
  const double wj = w / h_ + nw_;
  const int width = 2 * nw_ + 1;
  if (!(ti >= 0.0 && ti <= nt_ - 1 && wj >= 0.0 && wj <= width - 1)) return kNaN;
  const int i = std::min(static_cast<int>(ti), nt_ - 2);
  const int j = std::min(static_cast<int>(wj), width - 2);
  const double a = ti - i;
  const double b = wj - j;
  auto at = [&](int r, int c) { return grid[static_cast<std::size_t>(r) * width + c]; };
  return (1 - a) * ((1 - b) * at(i, j) + b * at(i, j + 1)) + a * ((1 - b) * at(i + 1, j) + b * at(i + 1, j + 1));
}

AdditiveTerm::Values GridAdditive::at(double t, double w) const {
  thread_local std::vector<double> scratch;
  const double slots[3] = {0.0, t, w};
  double b[2];
  b_.evaluate(slots, b, scratch);
  Values v;
  v.value = b[0] + c_ * w + interp(B_, t, w);
  v.t = b[1] + interp(Bt_, t, w);
  v.w = c_ - interp(beta_, t, w);
  v.ww = -rw_(slots);
  return v;
}

std::shared_ptr<const ScalarMap> ScalarMap::symbolic(Expression xi, std::optional<Expression> xi_inverse,
                                                     std::shared_ptr<const AdditiveTerm> additive,
                                                     model::Interval y_domain) {
  auto m = std::shared_ptr<ScalarMap>(new ScalarMap());
  m->bundle_ = expr::CompiledBundle(derivative_set(xi, {{}, {T}, {Y}, {W}, {Y, Y}, {Y, W}, {W, W}}), kScalar);
  m->xi_ = std::move(xi);
  if (xi_inverse) m->inverse_ = expr::CompiledExpression(*xi_inverse, kScalar);
  m->xi_inverse_ = std::move(xi_inverse);
  m->additive_ = std::move(additive);
  m->y_domain_ = y_domain;
  m->y0_ = 0.5 * (y_domain.lo + y_domain.hi);
  return m;
}

std::shared_ptr<const ScalarMap> ScalarMap::quadrature(Expression phi, double y0,
                                                       std::shared_ptr<const AdditiveTerm> additive,
                                                       model::Interval y_domain) {
  auto m = std::shared_ptr<ScalarMap>(new ScalarMap());
  const Expression g = expr::simplify(expr::constant(1.0) / phi);
  m->bundle_ = expr::CompiledBundle(derivative_set(g, {{}, {T}, {W}, {W, W}, {Y}}), kScalar);
  m->phi_ = std::move(phi);
  m->y0_ = y0;
  m->additive_ = std::move(additive);
  m->y_domain_ = y_domain;
  return m;
}

double ScalarMap::integrate(int which, double y, double t, double w) const {
  if (y == y0_) return 0.0;
  auto f = [&](double s) {
    thread_local std::vector<double> scratch;
    double out[5];
    const double slots[3] = {s, t, w};
    bundle_.evaluate(slots, out, scratch);
    return out[which];
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, y0_, y, 15, 1e-10);
}

double ScalarMap::xi_value(double y, double t, double w) const {
  if (xi_) {
    thread_local std::vector<double> scratch;
    double out[7];
    const double slots[3] = {y, t, w};
    bundle_.evaluate(slots, out, scratch);
    return out[0];
  }
  return integrate(0, y, t, w);
}

double ScalarMap::value(double y, double t, double w) const {
  const double b = additive_ ? additive_->at(t, w).value : 0.0;
  return xi_value(y, t, w) + b;
}

ScalarMap::Jet ScalarMap::jet(double y, double t, double w) const {
  thread_local std::vector<double> scratch;
  Jet j;
  const double slots[3] = {y, t, w};
  if (xi_) {
    double out[7];
    bundle_.evaluate(slots, out, scratch);
    j = {out[0], out[1], out[2], out[3], out[4], out[5], out[6]};
  } else {
    double out[5];  // g, g_t, g_w, g_ww, g_y
    bundle_.evaluate(slots, out, scratch);
    j.value = integrate(0, y, t, w);
    j.t = integrate(1, y, t, w);
    j.w = integrate(2, y, t, w);
    j.ww = integrate(3, y, t, w);
    j.y = out[0];
    j.yy = out[4];
    j.yw = out[2];
  }
  if (additive_) {
    const auto b = additive_->at(t, w);
    j.value += b.value;
    j.t += b.t;
    j.w += b.w;
    j.ww += b.ww;
  }
  return j;
}

double ScalarMap::inverse(double x, double t, double w) const {
  const double b = additive_ ? additive_->at(t, w).value : 0.0;
  if (xi_inverse_) {
    const double slots[3] = {x - b, t, w};
    return inverse_(slots);
  }
  auto residual = [&](double y) { return xi_value(y, t, w) + b - x; };
  // Grow a bracket around y0 geometrically; a side whose value turns
  // non-finite stops growing.
  double lo = y0_, hi = y0_;
  double flo = residual(lo), fhi = flo;
  if (!std::isfinite(flo)) throw Error(ErrorCode::Inversion, "map undefined at the reference point");
  if (flo == 0.0) return y0_;
  double step = std::max(1e-3, 0.05 * (y_domain_.hi - y_domain_.lo));
  bool grow_lo = true, grow_hi = true;
  for (int it = 0; it < 80 && (flo > 0) == (fhi > 0); ++it) {
    if (!grow_lo && !grow_hi) break;
    if (grow_lo) {
      const double f = residual(lo - step);
      if (std::isfinite(f)) {
        lo -= step;
        flo = f;
      } else {
        grow_lo = false;
      }
    }
    if (grow_hi && (flo > 0) == (fhi > 0)) {
      const double f = residual(hi + step);
      if (std::isfinite(f)) {
        hi += step;
        fhi = f;
      } else {
        grow_hi = false;
      }
    }
    step *= 2.0;
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    throw Error(ErrorCode::Inversion, "no root bracketed for x = " + std::to_string(x));
  }
  boost::math::tools::eps_tolerance<double> coarse(20);
  std::uintmax_t iters = 100;
  const auto br = boost::math::tools::bisect(residual, lo, hi, coarse, iters);
  if (!(br.first < br.second)) return br.first;
  auto fdf = [&](double y) {
    thread_local std::vector<double> scratch;
    double out[7];
    const double slots[3] = {y, t, w};
    bundle_.evaluate(slots, std::span<double>(out, bundle_.size()), scratch);
    return std::make_pair(residual(y), out[xi_ ? 2 : 0]);
  };
  iters = 50;
  return boost::math::tools::newton_raphson_iterate(fdf, 0.5 * (br.first + br.second), br.first, br.second,
                                                    50, iters);
}

std::string ScalarMap::describe() const {
  std::string s = xi_ ? "Xi = " + expr::to_string(*xi_) : "Xi = quadrature of 1/(" + expr::to_string(*phi_) + ")";
  if (additive_) {
    const auto sym = additive_->symbolic();
    s += sym ? ", B = " + expr::to_string(*sym) : ", B tabulated";
  }
  s += xi_inverse_ ? ", symbolic inverse" : ", numeric inverse";
  return s;
}

}  // namespace stochsym::transform
