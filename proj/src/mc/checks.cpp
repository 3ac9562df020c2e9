#include "mc/checks.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "common/error.hpp"
#include "expr/compiled.hpp"
#include "expr/simplify.hpp"

namespace stochsym::mc {

namespace {

const expr::VariableSpace kTime(1, 1);

double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * (v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - i) * (v[i + 1] - v[i]);
}

double integrate_t(const expr::Expression& e, double a, double b) {
  if (b == a) return 0.0;
  const expr::CompiledExpression c(e, kTime);
  auto f = [&](double t) {
    const double slots[3] = {0.0, t, 0.0};
    return c(slots);
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-12);
}

}  // namespace

ExactLaw::ExactLaw(expr::Expression f, expr::Expression s, double x0, double t0)
    : f_(std::move(f)), s2_(expr::simplify(s * s)), x0_(x0), t0_(t0) {
  for (const auto& e : {f_, s2_}) {
    if (expr::depends_on_kind(e, expr::VarKind::State) || expr::depends_on_kind(e, expr::VarKind::Noise)) {
      throw Error(ErrorCode::Invariant, "exact law needs coefficients of t only: " + expr::to_string(e));
    }
  }
}

double ExactLaw::mean(double T) const { return x0_ + integrate_t(f_, t0_, T); }

double ExactLaw::variance(double T) const { return integrate_t(s2_, t0_, T); }

KsResult ks_normal(std::vector<double> samples, double mean, double variance) {
  KsResult r;
  r.samples = static_cast<int>(samples.size());
  if (samples.empty() || !(variance > 0.0)) throw Error(ErrorCode::Usage, "KS test needs samples and variance > 0");
  std::sort(samples.begin(), samples.end());
  const boost::math::normal_distribution<double> law(mean, std::sqrt(variance));
  const double N = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = boost::math::cdf(law, samples[i]);
    d = std::max({d, (i + 1) / N - F, F - i / N});
  }
  r.statistic = d;
  const double l = std::sqrt(N) * d;
  if (l < 1.0) {
    // Small-argument form of the same series (converges fast there).
    constexpr double pi = 3.14159265358979323846;
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) sum += std::exp(-(2 * k - 1) * (2 * k - 1) * pi * pi / (8.0 * l * l));
    r.p_value = l < 1e-3 ? 1.0 : std::clamp(1.0 - std::sqrt(2.0 * pi) / l * sum, 0.0, 1.0);
  } else {
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double term = std::exp(-2.0 * k * k * l * l);
      sum += (k % 2 ? 1.0 : -1.0) * term;
      if (term < 1e-17) break;
    }
    r.p_value = std::clamp(2.0 * sum, 0.0, 1.0);
  }
  return r;
}

LawReport law_check(const PathEnsemble& ens, const ExactLaw& law, int min_paths, double alpha) {
  const auto x = ens.final_states(0);
  if (static_cast<int>(x.size()) < min_paths) {
    throw Error(ErrorCode::TooFewPaths, std::to_string(x.size()) + " completed paths, need " + std::to_string(min_paths));
  }
  LawReport r;
  const double T = ens.grid.end();
  r.mean = law.mean(T);
  r.variance = law.variance(T);
  r.alpha = alpha;
  double s = 0.0, s2 = 0.0;
  for (double v : x) s += v;
  r.sample_mean = s / x.size();
  for (double v : x) s2 += (v - r.sample_mean) * (v - r.sample_mean);
  r.sample_variance = s2 / (x.size() - 1);
  r.ks = ks_normal(x, r.mean, r.variance);
  r.pass = r.ks.p_value > alpha;
  return r;
}

PathwiseReport pathwise_check(const model::CoefficientModel& original, const transform::ChangeOfVariables& cov,
                              const model::CoefficientModel& reduced, const std::vector<double>& y0,
                              const PathwiseOptions& opts) {
  const int n = original.n();
  const int m = original.m();
  if (reduced.n() != n || reduced.m() != m || cov.n() != n) {
    throw Error(ErrorCode::Dimension, "pathwise check needs matching dimensions");
  }
  const transform::MapEvaluator map(cov, expr::VariableSpace(n, m));
  std::vector<double> slots(n + 1 + m, 0.0), x0(n);
  std::copy(y0.begin(), y0.end(), slots.begin());
  slots[n] = opts.t0;
  map.forward(slots, x0);

  PathwiseReport rep;
  for (double dt : opts.dts) {
    const Grid grid = Grid::until(opts.T, dt, opts.t0);
    const PathEnsemble noise = wiener_increments(m, grid, opts.seed, opts.paths, opts.sim);
    const PathEnsemble ys = simulate(original, y0, noise, opts.sim);
    const PathEnsemble xs = simulate(reduced, x0, noise, opts.sim);
    std::vector<double> err(opts.paths, std::numeric_limits<double>::quiet_NaN());
    parallel_for(opts.paths, opts.sim.threads, [&](int p) {
      if (ys.failed[p] || xs.failed[p]) return;
      const auto w = noise.wiener(p);
      std::vector<double> s(n + 1 + m), img(n);
      double worst = 0.0;
      for (int k = 0; k <= grid.steps; ++k) {
        for (int i = 0; i < n; ++i) s[i] = ys.state(p, k, i);
        s[n] = grid.time(k);
        for (int j = 0; j < m; ++j) s[n + 1 + j] = w[static_cast<std::size_t>(k) * m + j];
        map.forward(s, img);
        for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(img[i] - xs.state(p, k, i)));
      }
      err[p] = std::isfinite(worst) ? worst : std::numeric_limits<double>::quiet_NaN();
    });
    std::vector<double> ok;
    for (double e : err) {
      if (std::isfinite(e)) ok.push_back(e);
    }
    std::sort(ok.begin(), ok.end());
    rep.levels.push_back({dt, quantile_sorted(ok, 0.5), quantile_sorted(ok, 0.95), static_cast<int>(ok.size())});
    if (static_cast<int>(ok.size()) < opts.paths) {
      rep.notes.push_back("dt " + std::to_string(dt) + ": " + std::to_string(opts.paths - ok.size()) +
                          " paths excluded (blow-up or map undefined)");
    }
  }
  rep.monotone = true;
  rep.min_factor = std::numeric_limits<double>::infinity();
  bool exact = true;
  for (const auto& l : rep.levels) exact = exact && l.median == 0.0;
  for (std::size_t i = 1; i < rep.levels.size(); ++i) {
    const double a = rep.levels[i - 1].median, b = rep.levels[i].median;
    if (exact) continue;
    const double f = b > 0.0 ? a / b : std::numeric_limits<double>::infinity();
    rep.min_factor = std::min(rep.min_factor, f);
    rep.monotone = rep.monotone && b < a;
  }
  if (exact) rep.notes.push_back("errors are exactly zero at every dt");
  const bool enough = !rep.levels.empty() && rep.levels.back().used >= opts.paths / 2;
  const double last = rep.levels.empty() ? std::numeric_limits<double>::quiet_NaN() : rep.levels.back().median;
  rep.pass = enough && (exact || (rep.monotone && rep.min_factor >= opts.factor)) && last < opts.final_tol;
  return rep;
}

}  // namespace stochsym::mc
