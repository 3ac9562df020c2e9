#include "transform/change_of_variables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/error.hpp"
#include "common/halton.hpp"
#include "model/sampler.hpp"
#include "symcheck/compat.hpp"

namespace stochsym::transform {

using expr::Variable;

int ChangeOfVariables::n() const {
  if (!forward.empty()) return static_cast<int>(forward.size());
  if (!inverse.empty()) return static_cast<int>(inverse.size());
  return numeric ? 1 : 0;
}

bool ChangeOfVariables::random() const {
  for (const auto& e : forward) {
    if (expr::depends_on_kind(e, expr::VarKind::Noise)) return true;
  }
  for (const auto& e : inverse) {
    if (expr::depends_on_kind(e, expr::VarKind::Noise)) return true;
  }
  if (expr::depends_on_kind(beta, expr::VarKind::Noise)) return true;
  if (numeric) {
    if (numeric->xi() && expr::depends_on_kind(*numeric->xi(), expr::VarKind::Noise)) return true;
    if (numeric->phi() && expr::depends_on_kind(*numeric->phi(), expr::VarKind::Noise)) return true;
    if (numeric->additive() && !numeric->additive()->symbolic()) return true;
    if (numeric->additive() && numeric->additive()->symbolic() &&
        expr::depends_on_kind(*numeric->additive()->symbolic(), expr::VarKind::Noise)) {
      return true;
    }
  }
  return false;
}

ChangeOfVariables ChangeOfVariables::identity(int n) {
  ChangeOfVariables cov;
  for (int i = 1; i <= n; ++i) {
    cov.forward.push_back(expr::var(Variable::x(i)));
    cov.inverse.push_back(expr::var(Variable::x(i)));
  }
  return cov;
}

MapEvaluator::MapEvaluator(const ChangeOfVariables& cov, const expr::VariableSpace& space)
    : n_(cov.n()), numeric_(cov.numeric) {
  if (cov.has_forward()) {
    forward_ = expr::CompiledBundle(cov.forward, space);
    has_forward_ = true;
  }
  if (cov.has_inverse()) {
    inverse_ = expr::CompiledBundle(cov.inverse, space);
    has_inverse_ = true;
  }
  if (numeric_) {
    if (space.n() != 1 || space.m() != 1) {
      throw Error(ErrorCode::Dimension, "numeric maps are scalar (n = m = 1)");
    }
    has_inverse_ = true;
  }
  if (!has_forward_ && !numeric_) throw Error(ErrorCode::Usage, "map has no forward part");
}

void MapEvaluator::forward(std::span<const double> old_slots, std::span<double> out) const {
  if (has_forward_) {
    thread_local std::vector<double> scratch;
    forward_.evaluate(old_slots, out, scratch);
    return;
  }
  out[0] = numeric_->value(old_slots[0], old_slots[1], old_slots[2]);
}

void MapEvaluator::inverse(std::span<const double> new_slots, std::span<double> out) const {
  if (inverse_.size() > 0) {
    thread_local std::vector<double> scratch;
    inverse_.evaluate(new_slots, out, scratch);
    return;
  }
  if (!numeric_) throw Error(ErrorCode::Inversion, "map has no inverse");
  out[0] = numeric_->inverse(new_slots[0], new_slots[1], new_slots[2]);
}

RoundTrip check_round_trip(const ChangeOfVariables& cov, const expr::VariableSpace& space,
                           const model::Domain& old_domain, int points, double tol) {
  const MapEvaluator ev(cov, space);
  std::vector<Expression> watch = cov.forward;
  const model::Sampler sampler(space, old_domain);
  const auto pts = sampler.sample(watch, points);
  const int n = space.n();
  RoundTrip rt;
  std::vector<double> image(n), back(n);
  for (const auto& p : pts) {
    ev.forward(p, image);
    std::vector<double> q(p);
    for (int i = 0; i < n; ++i) q[i] = image[i];
    double err = 0.0;
    try {
      ev.inverse(q, back);
      for (int i = 0; i < n; ++i) err = std::max(err, std::abs(back[i] - p[i]) / (1.0 + std::abs(p[i])));
      if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      err = std::numeric_limits<double>::infinity();
    }
    rt.max_error = std::max(rt.max_error, err);
    ++rt.points;
  }
  rt.pass = rt.points > 0 && rt.max_error < tol;
  return rt;
}

void require_monotone(const ChangeOfVariables& cov, const model::System& sys) {
  if (sys.n() != 1) throw Error(ErrorCode::Dimension, "monotonicity check is for scalar maps");
  Expression dphi;
  if (cov.has_forward()) {
    dphi = expr::differentiate(cov.forward[0], Variable::x(1));
  } else if (cov.numeric && cov.numeric->phi()) {
    dphi = expr::constant(1.0) / *cov.numeric->phi();
  } else if (cov.numeric && cov.numeric->xi()) {
    dphi = expr::differentiate(*cov.numeric->xi(), Variable::x(1));
  } else {
    return;
  }
  try {
    symcheck::require_nonvanishing(sys, dphi, "Phi_y");
  } catch (const Error& e) {
    throw Error(ErrorCode::Monotonicity, std::string("map is not strictly monotone: ") + e.what());
  }
}

model::Domain image_domain(const ChangeOfVariables& cov, const expr::VariableSpace& space,
                           const model::Domain& old_domain) {
  const MapEvaluator ev(cov, space);
  const int n = space.n();
  model::Domain out = old_domain;
  const double inf = std::numeric_limits<double>::infinity();
  const model::Sampler sampler(space, old_domain);
  if (n == 1) {
    // Monotone in y: the image at fixed (t, w) is between the endpoint values.
    double lo = -inf, hi = inf;
    double box_lo = inf, box_hi = -inf;
    double v[1];
    for (int i = 0; i < 200; ++i) {
      std::vector<double> slots(space.size());
      for (int k = 1; k < space.size(); ++k) {
        const auto box = old_domain.of(space.variables()[k]);
        slots[k] = box.lo + (box.hi - box.lo) * halton(static_cast<std::uint64_t>(i), k);
      }
      slots[0] = old_domain.x[0].lo;
      ev.forward(slots, v);
      const double a = v[0];
      slots[0] = old_domain.x[0].hi;
      ev.forward(slots, v);
      const double b = v[0];
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      lo = std::max(lo, std::min(a, b));
      hi = std::min(hi, std::max(a, b));
      box_lo = std::min(box_lo, std::min(a, b));
      box_hi = std::max(box_hi, std::max(a, b));
    }
    if (lo < hi) {
      out.x[0] = {lo, hi};
    } else if (box_lo < box_hi) {
      out.x[0] = {box_lo, box_hi};
    }
    return out;
  }
  std::vector<Expression> watch = cov.forward;
  const auto pts = sampler.sample(watch, 200);
  std::vector<double> lo(n, inf), hi(n, -inf), v(n);
  for (const auto& p : pts) {
    ev.forward(p, v);
    for (int i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (lo[i] < hi[i]) out.x[i] = {lo[i], hi[i]};
  }
  return out;
}

}  // namespace stochsym::transform
