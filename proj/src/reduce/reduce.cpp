#include "reduce/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "common/error.hpp"
#include "expr/compiled.hpp"
#include "expr/integrate.hpp"
#include "expr/simplify.hpp"
#include "symcheck/chain.hpp"
#include "symcheck/compat.hpp"
#include "symcheck/residuals.hpp"
#include "transform/transform.hpp"

namespace stochsym::reduce {

namespace {

using expr::Variable;
using expr::VarKind;
using model::System;
using model::VectorField;
using symcheck::ResidualReport;
using transform::ChangeOfVariables;

double mid(const model::Interval& i) { return 0.5 * (i.lo + i.hi); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

[[noreturn]] void stage_failure(const std::string& stage, const std::string& check, const std::string& detail) {
  throw Error(ErrorCode::StageFailure, "stage " + stage + ": " + check + " failed (" + detail + ")");
}

// Sampled d/dv of every expression; pass means all of them are v-free.
ResidualReport independence(const std::vector<Expression>& exprs, Variable v, const expr::VariableSpace& space,
                            const model::Domain& domain, const symcheck::CheckOptions& opts) {
  ResidualReport r;
  r.check = "independent of " + v.name();
  std::vector<Expression> res, scale;
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    if (!expr::depends_on(exprs[i], v)) continue;
    const Expression d = expr::differentiate(exprs[i], v);
    r.entries.push_back({"d" + v.name() + "[" + std::to_string(i + 1) + "]", expr::simplify(d), 0.0});
    res.push_back(d);
    scale.push_back(exprs[i]);
  }
  if (res.empty()) {
    r.pass = true;
    r.tol = opts.tol;
    r.notes.push_back("structurally free of " + v.name());
    return r;
  }
  symcheck::sample_and_judge(r, res, scale, space, domain, opts, exprs);
  return r;
}

// Drops v from expressions that passed the sampled check by fixing it.
std::vector<Expression> freeze(const std::vector<Expression>& exprs, Variable v, double value) {
  std::vector<Expression> out;
  for (const auto& e : exprs) {
    out.push_back(expr::depends_on(e, v) ? expr::simplify(expr::substitute(e, {{v, expr::constant(value)}})) : e);
  }
  return out;
}

std::string describe(const ResidualReport& r) {
  return "max residual " + fmt(r.max_residual) + ", tol " + fmt(r.tol * r.scale);
}

// X in the new coordinates: (dPhi/dy) X, or J^{-1} X(G) with J = dG/dz when
// only the inverse is known.
VectorField pushed(const VectorField& X, const ChangeOfVariables& cov) {
  if (cov.has_forward()) return transform::push_forward(X, cov);
  const int n = cov.n();
  std::map<Variable, Expression> to_old;
  for (int i = 0; i < n; ++i) to_old[Variable::x(i + 1)] = cov.inverse[i];
  std::vector<std::vector<Expression>> J(n, std::vector<Expression>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) J[i][j] = expr::differentiate(cov.inverse[i], Variable::x(j + 1));
  }
  const auto Jinv = transform::cofactor_inverse(J);
  VectorField out;
  for (int i = 0; i < n; ++i) {
    Expression s = expr::constant(0.0);
    for (int j = 0; j < n; ++j) s = s + Jinv[i][j] * expr::substitute(X.coeffs[j], to_old);
    out.coeffs.push_back(expr::simplify(s));
  }
  return out;
}

model::Domain truncate(const model::Domain& d, int n) {
  model::Domain out = d;
  out.x.resize(n);
  return out;
}

struct StageOutput {
  Stage stage;
  std::optional<System> block;  // reduced block, n - 1 coordinates
  Reconstruction rec;
  model::Interval rec_box;
  std::vector<std::pair<std::string, VectorField>> rest;
};

StageOutput run_stage(const System& sys, const std::string& name, const VectorField& X, const ChangeOfVariables& cov,
                      const std::vector<std::pair<std::string, VectorField>>& rest, const ReduceOptions& opts) {
  const int b = sys.n();
  const int m = sys.m();
  if (X.n() != b || cov.n() != b) {
    throw Error(ErrorCode::Dimension, "stage " + name + ": generator and map need " + std::to_string(b) + " components");
  }
  if (X.random()) throw Error(ErrorCode::Unsupported, "system reduction needs a deterministic generator");
  if (sys.kind() != System::Kind::Ito) throw Error(ErrorCode::Usage, "system reduction needs an Ito system");

  StageOutput out;
  out.stage.generator = name;
  out.stage.cov = cov;
  auto& checks = out.stage.checks;

  auto sym = symcheck::deterministic_residuals(sys, X, opts.check);
  sym.check = "symmetry " + name;
  checks.push_back(sym);
  if (!sym.pass) stage_failure(name, sym.check, describe(sym));

  const auto tr = transform::transform_system(sys, cov);
  if (!tr.symbolic()) {
    throw Error(ErrorCode::Unsupported, "stage " + name + ": transformed coefficients have no closed form");
  }
  if (tr.system->references_noise()) {
    throw Error(ErrorCode::Unsupported, "stage " + name + ": system reduction needs a deterministic map");
  }
  const auto& space = tr.system->space();

  // The map straightens X iff X^i(G(y)) = dG^i/dy^b.
  {
    ResidualReport st;
    st.check = "straightening";
    std::map<Variable, Expression> to_old;
    for (int i = 0; i < b; ++i) to_old[Variable::x(i + 1)] = cov.inverse[i];
    std::vector<Expression> res, scale;
    for (int i = 0; i < b; ++i) {
      const Expression dG = expr::differentiate(cov.inverse[i], Variable::x(b));
      const Expression r = expr::substitute(X.coeffs[i], to_old) - dG;
      st.entries.push_back({"straight[" + std::to_string(i + 1) + "]", expr::simplify(r), 0.0});
      res.push_back(r);
      scale.push_back(dG);
    }
    symcheck::sample_and_judge(st, res, scale, space, tr.domain, opts.check, cov.inverse);
    checks.push_back(st);
    if (!st.pass) {
      throw Error(ErrorCode::CovMismatch,
                  "stage " + name + ": the map does not take " + name + " to d/dx" + std::to_string(b) + " (" +
                      describe(st) + ")");
    }
  }

  const Variable last = Variable::x(b);
  const double last_mid = mid(tr.domain.x[b - 1]);
  auto coeffs = tr.system->coefficients();
  auto ind = independence(coeffs, last, space, tr.domain, opts.check);
  ind.check = "coefficients " + ind.check;
  checks.push_back(ind);
  if (!ind.pass) stage_failure(name, ind.check, describe(ind));
  coeffs = freeze(coeffs, last, last_mid);

  std::vector<Expression> drift(coeffs.begin(), coeffs.begin() + b);
  std::vector<std::vector<Expression>> diffusion(b);
  for (int i = 0; i < b; ++i) diffusion[i].assign(coeffs.begin() + b + i * m, coeffs.begin() + b + (i + 1) * m);
  const System clean = System::ito(space, drift, diffusion, tr.domain);

  VectorField straight;
  straight.coeffs.assign(b, expr::constant(0.0));
  straight.coeffs[b - 1] = expr::constant(1.0);
  auto kept = symcheck::deterministic_residuals(clean, straight, opts.check);
  kept.check = "d/dx" + std::to_string(b) + " is a symmetry of the transformed system";
  checks.push_back(kept);
  if (!kept.pass) stage_failure(name, kept.check, describe(kept));

  for (const auto& [other, Y] : rest) {
    if (Y.n() != b) throw Error(ErrorCode::Dimension, "generator " + other + " has the wrong dimension");
    const VectorField Yt = pushed(Y, cov);
    auto pres = symcheck::deterministic_residuals(clean, Yt, opts.check);
    pres.check = other + " preserved";
    checks.push_back(pres);
    if (!pres.pass) stage_failure(name, pres.check, describe(pres));
    if (b == 1) continue;
    const std::vector<Expression> head(Yt.coeffs.begin(), Yt.coeffs.end() - 1);
    auto proj = independence(head, last, space, tr.domain, opts.check);
    proj.check = other + " projects onto the reduced block";
    checks.push_back(proj);
    if (!proj.pass) stage_failure(name, proj.check, describe(proj));
    VectorField P;
    P.coeffs = freeze(head, last, last_mid);
    out.rest.emplace_back(other, P);
  }

  out.rec.index = b;
  out.rec.drift = drift[b - 1];
  out.rec.diffusion = diffusion[b - 1];
  out.rec_box = tr.domain.x[b - 1];
  if (b > 1) {
    const expr::VariableSpace small(b - 1, m);
    std::vector<Expression> d(drift.begin(), drift.end() - 1);
    std::vector<std::vector<Expression>> s(diffusion.begin(), diffusion.end() - 1);
    out.block = System::ito(small, d, s, truncate(tr.domain, b - 1));
  }
  out.stage.system = clean;
  return out;
}

// Reconstruction of x^i may use x^1..x^{i-1} and t only.
void require_triangular(const Reconstruction& r) {
  std::vector<Expression> all{r.drift};
  all.insert(all.end(), r.diffusion.begin(), r.diffusion.end());
  for (const auto& e : all) {
    for (const Variable v : expr::free_variables(e)) {
      if (v.kind == VarKind::Noise || (v.kind == VarKind::State && v.index >= r.index)) {
        throw Error(ErrorCode::Internal, "reconstruction of x" + std::to_string(r.index) + " references " + v.name());
      }
    }
  }
}

// total: original -> intermediate (n coordinates); stage: first b intermediate
// coordinates -> final ones.
ChangeOfVariables compose(const ChangeOfVariables& total, const ChangeOfVariables& stage) {
  const int b = stage.n();
  ChangeOfVariables out;
  if (total.has_forward() && stage.has_forward()) {
    std::map<Variable, Expression> sub;
    for (int j = 0; j < b; ++j) sub[Variable::x(j + 1)] = total.forward[j];
    out.forward = total.forward;
    for (int i = 0; i < b; ++i) out.forward[i] = expr::simplify(expr::substitute(stage.forward[i], sub));
  }
  if (total.has_inverse() && stage.has_inverse()) {
    std::map<Variable, Expression> sub;
    for (int j = 0; j < b; ++j) sub[Variable::x(j + 1)] = stage.inverse[j];
    for (const auto& e : total.inverse) out.inverse.push_back(expr::simplify(expr::substitute(e, sub)));
  }
  out.notes = total.notes;
  return out;
}

IntegrableScalarForm make_form(const Expression& f, const Expression& sigma) {
  IntegrableScalarForm form{f, sigma, std::nullopt, std::nullopt};
  form.drift_integral = expr::integrate_rule_based(f, Variable::time());
  form.variance_integral = expr::integrate_rule_based(expr::simplify(sigma * sigma), Variable::time());
  if (form.drift_integral) form.drift_integral = expr::simplify(*form.drift_integral);
  if (form.variance_integral) form.variance_integral = expr::simplify(*form.variance_integral);
  return form;
}

bool state_free(const System& s) {
  for (const auto& e : s.coefficients()) {
    if (expr::depends_on_kind(e, VarKind::State) || expr::depends_on_kind(e, VarKind::Noise)) return false;
  }
  return true;
}

// Final assembly from the last block and the accumulated reconstruction.
void finish(ReductionResult& r, const System& original, const std::optional<System>& block,
            std::vector<std::pair<Reconstruction, model::Interval>> recs) {
  std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.first.index < b.first.index; });
  r.reduced = block;
  const expr::VariableSpace space(r.n, r.m);
  std::vector<Expression> drift;
  std::vector<std::vector<Expression>> diffusion;
  model::Domain domain = original.domain();
  domain.x.clear();
  if (block) {
    drift = block->drift();
    diffusion = block->diffusion();
    domain.x = block->domain().x;
    domain.t = block->domain().t;
  } else if (!r.stages.empty() && r.stages.back().system) {
    domain.t = r.stages.back().system->domain().t;
  }
  for (const auto& [rec, box] : recs) {
    require_triangular(rec);
    r.reconstruction.push_back(rec);
    drift.push_back(rec.drift);
    diffusion.push_back(rec.diffusion);
    domain.x.push_back(box);
  }
  r.full = System::ito(space, drift, diffusion, domain);
  r.coefficients = std::make_shared<model::CompiledSystem>(*r.full);
  r.integrable = !block || state_free(*block);
  if (block && block->n() == 1 && block->m() == 1 && r.integrable) {
    r.form = make_form(block->drift(0), block->diffusion(0, 0));
  } else if (!block && r.n == 1 && r.m == 1) {
    r.form = make_form(r.reconstruction[0].drift, r.reconstruction[0].diffusion[0]);
  }
}

// Numeric coefficients of a scalar transformed system must not move with x or w.
ResidualReport numeric_t_only(const model::CoefficientModel& c, const model::Domain& d, double tol) {
  ResidualReport r;
  r.check = "t-only coefficients (numeric)";
  r.tol = tol;
  std::vector<double> slots(3), f(1), s(1), scratch;
  double worst = 0.0, scale = 1.0;
  int points = 0;
  const model::Interval xb = d.x[0], wb = d.w.empty() ? model::Interval{0.0, 0.0} : d.w[0];
  for (int a = 0; a < 8; ++a) {
    const double t = d.t.lo + (a + 0.5) / 8.0 * (d.t.hi - d.t.lo);
    slots = {mid(xb), t, 0.0};
    c.evaluate(slots, f, s, scratch);
    const double f0 = f[0], s0 = s[0];
    if (!std::isfinite(f0) || !std::isfinite(s0)) continue;
    scale = std::max({scale, 1.0 + std::abs(f0), 1.0 + std::abs(s0)});
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 5; ++j) {
        slots = {xb.lo + (i + 0.5) / 6.0 * (xb.hi - xb.lo), t, wb.lo + (j + 0.5) / 5.0 * (wb.hi - wb.lo)};
        c.evaluate(slots, f, s, scratch);
        if (!std::isfinite(f[0]) || !std::isfinite(s[0])) continue;
        worst = std::max({worst, std::abs(f[0] - f0), std::abs(s[0] - s0)});
        ++points;
      }
    }
  }
  r.max_residual = worst;
  r.scale = scale;
  r.points = points;
  r.pass = points > 0 && worst < tol * scale;
  return r;
}

}  // namespace

ReductionResult integrate_scalar(const System& sys, const VectorField& X, const ReduceOptions& opts) {
  if (sys.n() != 1 || sys.m() != 1 || X.n() != 1) {
    throw Error(ErrorCode::Dimension, "scalar integration needs n = m = 1");
  }
  if (sys.kind() != System::Kind::Ito) throw Error(ErrorCode::Usage, "scalar integration needs an Ito system");
  const Expression& phi = X.coeffs[0];
  ReductionResult r;
  r.n = r.m = 1;
  Stage stage;
  stage.generator = "X";

  auto sym = X.random() ? symcheck::random_residuals(sys, X, opts.check)
                        : symcheck::deterministic_residuals(sys, X, opts.check);
  sym.check = "symmetry";
  stage.checks.push_back(sym);
  if (!sym.pass) throw Error(ErrorCode::Invariant, "X is not a symmetry of the system (" + describe(sym) + ")");

  if (X.random()) {
    auto comp = symcheck::compatibility_check(sys, phi, opts.check);
    stage.checks.push_back(comp);
    if (!comp.pass) {
      throw Error(ErrorCode::CompatibilityFailed,
                  "no random map to an integrable equation: compatibility residual " +
                      expr::to_string(comp.entries.front().residual) + " reaches " + fmt(comp.max_residual));
    }
  }

  const auto xi = transform::build_phi_from_symmetry(sys, phi);
  const auto beta = transform::solve_beta(sys, xi, opts.beta);
  const auto cov = transform::with_beta(xi, beta, sys.domain().x[0]);
  r.notes.insert(r.notes.end(), beta.notes.begin(), beta.notes.end());
  const auto tr = transform::transform_scalar(sys, cov);
  r.notes.insert(r.notes.end(), tr.notes.begin(), tr.notes.end());
  stage.cov = cov;
  r.total = cov;

  if (!tr.symbolic()) {
    auto chk = numeric_t_only(*tr.coefficients, tr.domain, 1e-6);
    stage.checks.push_back(chk);
    if (!chk.pass) {
      throw Error(ErrorCode::NonIntegrable, "transformed coefficients still vary with x or w (" + describe(chk) + ")");
    }
    r.coefficients = tr.coefficients;
    r.integrable = true;
    r.notes.push_back("map has no closed form; t-only coefficients confirmed numerically");
    r.stages.push_back(std::move(stage));
    return r;
  }

  std::vector<Expression> c = {tr.system->drift(0), tr.system->diffusion(0, 0)};
  const auto& space = tr.system->space();
  for (const Variable v : {Variable::x(1), Variable::w(1)}) {
    auto ind = independence(c, v, space, tr.domain, opts.check);
    stage.checks.push_back(ind);
    if (!ind.pass) {
      throw Error(ErrorCode::NonIntegrable, "transformed coefficients depend on " + v.name() + " (" + describe(ind) + ")");
    }
  }
  c = freeze(c, Variable::x(1), mid(tr.domain.x[0]));
  c = freeze(c, Variable::w(1), 0.0);
  const System integrable = System::ito(space, {c[0]}, {{c[1]}}, tr.domain);
  stage.system = integrable;
  r.stages.push_back(std::move(stage));
  r.full = integrable;
  r.coefficients = std::make_shared<model::CompiledSystem>(integrable);
  r.reconstruction.push_back({1, c[0], {c[1]}});
  r.integrable = true;
  r.form = make_form(c[0], c[1]);
  return r;
}

ReductionResult reduce_once(const System& sys, const VectorField& X, const ChangeOfVariables& cov,
                            const ReduceOptions& opts) {
  if (sys.n() == 1 && sys.m() == 1) {
    auto r = integrate_scalar(sys, X, opts);
    r.notes.push_back("scalar system: map built from the generator, the supplied one is not used");
    return r;
  }
  model::SolvableChain chain;
  chain.names = {"X"};
  chain.fields = {X};
  return reduce_chain(sys, chain, {cov}, opts);
}

ReductionResult reduce_chain(const System& sys, const model::SolvableChain& chain,
                             const std::vector<ChangeOfVariables>& covs, const ReduceOptions& opts) {
  const int r = static_cast<int>(chain.fields.size());
  const int n = sys.n();
  if (r == 0 || static_cast<int>(covs.size()) != r) {
    throw Error(ErrorCode::Usage, "reduction needs one map per generator");
  }
  if (r > n) throw Error(ErrorCode::Dimension, "more generators than coordinates");
  auto name = [&](int k) {
    return k < static_cast<int>(chain.names.size()) ? chain.names[k] : "X" + std::to_string(k + 1);
  };

  ReductionResult res;
  res.n = n;
  res.m = sys.m();
  if (r > 1) {
    auto solv = symcheck::check_solvable_chain(chain, sys.space(), sys.domain(), opts.check);
    if (!solv.pass) stage_failure("0", "solvable chain", describe(solv));
    if (solv.values["independent"] == 0.0) stage_failure("0", "pointwise independence", "generators are dependent");
    res.notes.push_back("solvable chain verified");
  }

  res.total = ChangeOfVariables::identity(n);
  std::optional<System> block = sys;
  std::vector<std::pair<std::string, VectorField>> rest;
  for (int k = 0; k < r; ++k) rest.emplace_back(name(k), chain.fields[k]);
  std::vector<std::pair<Reconstruction, model::Interval>> recs;

  for (int s = 0; s < r; ++s) {
    if (static_cast<int>(rest.size()) != r - s) throw Error(ErrorCode::Internal, "generator bookkeeping");
    const auto [gname, X] = rest.back();
    rest.pop_back();
    if (covs[s].n() != block->n()) {
      throw Error(ErrorCode::Dimension, "map of stage " + std::to_string(s + 1) + " needs " +
                                            std::to_string(block->n()) + " components");
    }
    StageOutput out = run_stage(*block, gname, X, covs[s], rest, opts);
    out.stage.generator = gname;

    // Earlier reconstruction equations are rewritten in this stage's coordinates.
    const ChangeOfVariables& c = covs[s];
    std::map<Variable, Expression> sub;
    for (int j = 0; j < c.n(); ++j) sub[Variable::x(j + 1)] = c.inverse[j];
    for (auto& [rec, box] : recs) {
      rec.drift = expr::simplify(expr::substitute(rec.drift, sub));
      for (auto& d : rec.diffusion) d = expr::simplify(expr::substitute(d, sub));
    }
    recs.emplace_back(out.rec, out.rec_box);
    res.total = compose(res.total, c);
    rest = out.rest;
    block = out.block;
    res.stages.push_back(std::move(out.stage));
  }
  finish(res, sys, block, std::move(recs));
  return res;
}

std::optional<SeparableForm> separable_detect(const Expression& beta, const Expression& f, const Expression& sigma,
                                              const model::Interval& x_box) {
  for (const Variable v : expr::free_variables(beta)) {
    if (v != Variable::x(1)) return std::nullopt;
  }
  for (const auto& e : {f, sigma}) {
    for (const Variable v : expr::free_variables(e)) {
      if (v != Variable::time()) return std::nullopt;
    }
  }
  const expr::CompiledExpression b(beta, expr::VariableSpace(1, 1));
  std::vector<double> ratios;
  for (int i = 0; i < 64; ++i) {
    const double x = x_box.lo + (i + 0.5) / 64.0 * (x_box.hi - x_box.lo);
    if (std::abs(x) < 1e-3) continue;
    const double slots[3] = {x, 0.0, 0.0};
    const double q = b(slots) / x;
    if (!std::isfinite(q)) return std::nullopt;
    ratios.push_back(q);
  }
  if (ratios.empty()) return std::nullopt;
  const double b0 = ratios.front();
  for (double q : ratios) {
    if (std::abs(q - b0) > 1e-8 * (1.0 + std::abs(b0))) return std::nullopt;
  }
  if (b0 == 0.0) return std::nullopt;

  SeparableForm out;
  out.b0 = b0;
  const Expression x = expr::var(Variable::x(1));
  out.X.coeffs = {x};
  out.cov.forward = {expr::log(x)};
  out.cov.inverse = {expr::exp(x)};
  const Expression k = expr::constant(b0);
  out.form = make_form(expr::simplify(k * f - expr::constant(0.5 * b0 * b0) * sigma * sigma),
                       expr::simplify(k * sigma));
  return out;
}

mc::PathEnsemble reconstruct(const ReductionResult& result, const mc::PathEnsemble& reduced_paths,
                             const std::vector<double>& initial, const mc::SimOptions& opts) {
  const int n = result.n;
  const int m = result.m;
  const int nb = result.reduced_dimension();
  const int r = static_cast<int>(result.reconstruction.size());
  if (nb + r != n) throw Error(ErrorCode::Unsupported, "result has no closed-form reconstruction equations");
  if (static_cast<int>(initial.size()) != r) {
    throw Error(ErrorCode::Usage, "need " + std::to_string(r) + " initial values for the reconstructed coordinates");
  }
  if (reduced_paths.n != nb) throw Error(ErrorCode::Dimension, "reduced paths have the wrong dimension");
  const std::size_t steps = static_cast<std::size_t>(reduced_paths.grid.steps);
  if (reduced_paths.m != m || reduced_paths.dW.size() != static_cast<std::size_t>(reduced_paths.paths) * steps * m) {
    throw Error(ErrorCode::IncrementMismatch, "reduced paths carry no increments for m = " + std::to_string(m));
  }

  const expr::VariableSpace space(n, m);
  std::vector<expr::CompiledBundle> eqs;
  for (const auto& rec : result.reconstruction) {
    std::vector<Expression> e{rec.drift};
    e.insert(e.end(), rec.diffusion.begin(), rec.diffusion.end());
    eqs.emplace_back(e, space);
  }

  mc::PathEnsemble out;
  out.grid = reduced_paths.grid;
  out.n = n;
  out.m = m;
  out.seed = reduced_paths.seed;
  out.paths = reduced_paths.paths;
  out.dW = reduced_paths.dW;
  out.failed = reduced_paths.failed;
  out.failed.resize(out.paths, 0);
  out.x.assign(static_cast<std::size_t>(out.paths) * (steps + 1) * n, std::numeric_limits<double>::quiet_NaN());
  const double dt = out.grid.dt;

  mc::parallel_for(out.paths, opts.threads, [&](int p) {
    std::vector<double> slots(n + 1 + m, 0.0), vals(1 + m), scratch;
    double* xp = out.x.data() + static_cast<std::size_t>(p) * (steps + 1) * n;
    for (std::size_t k = 0; k <= steps; ++k) {
      for (int i = 0; i < nb; ++i) xp[k * n + i] = reduced_paths.state(p, static_cast<int>(k), i);
    }
    for (int q = 0; q < r; ++q) xp[nb + q] = initial[q];
    for (std::size_t k = 0; k < steps; ++k) {
      std::copy(xp + k * n, xp + (k + 1) * n, slots.begin());
      slots[n] = out.grid.time(static_cast<int>(k));
      bool ok = true;
      for (int q = 0; q < r; ++q) {
        eqs[q].evaluate(slots, vals, scratch);
        double v = xp[k * n + nb + q] + vals[0] * dt;
        for (int j = 0; j < m; ++j) v += vals[1 + j] * out.increment(p, static_cast<int>(k), j);
        xp[(k + 1) * n + nb + q] = v;
        ok = ok && std::isfinite(v) && std::abs(v) <= opts.blowup;
      }
      for (int i = 0; i < nb; ++i) ok = ok && std::isfinite(xp[(k + 1) * n + i]);
      if (!ok) {
        std::fill(xp + (k + 1) * n, xp + (steps + 1) * n, std::numeric_limits<double>::quiet_NaN());
        out.failed[p] = 1;
        break;
      }
      for (int j = 0; j < m; ++j) slots[n + 1 + j] += out.increment(p, static_cast<int>(k), j);
    }
  });
  return out;
}

}  // namespace stochsym::reduce
