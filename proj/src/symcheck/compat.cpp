#include "symcheck/compat.hpp"

#include <cmath>

#include "common/error.hpp"
#include "expr/compiled.hpp"
#include "expr/simplify.hpp"
#include "model/operators.hpp"
#include "model/sampler.hpp"

namespace stochsym::symcheck {

using expr::constant;
using expr::differentiate;
using expr::Variable;

namespace {

void require_scalar(const model::System& sys, const char* what) {
  if (sys.n() != 1 || sys.m() != 1) {
    throw Error(ErrorCode::Dimension, std::string(what) + " needs a scalar system (n = m = 1)");
  }
}

}  // namespace

void require_nonvanishing(const model::System& sys, const Expression& e, const std::string& what,
                          int points) {
  // Sample on the unguarded domain: the guard would hide exactly the zeros
  // we are looking for.
  const model::Sampler sampler(sys.space(), sys.domain(), 0.0);
  const auto pts = sampler.sample({e}, points);
  if (pts.empty()) {
    throw Error(ErrorCode::ZeroCoefficient, what + " is undefined on the whole domain");
  }
  const expr::CompiledExpression c(e, sys.space());
  int sign = 0;
  for (const auto& p : pts) {
    const double v = c(p);
    if (v == 0.0 || !std::isfinite(v)) {
      throw Error(ErrorCode::ZeroCoefficient, what + " vanishes on the domain");
    }
    const int s = v > 0 ? 1 : -1;
    if (sign != 0 && s != sign) {
      throw Error(ErrorCode::ZeroCoefficient, what + " changes sign on the domain");
    }
    sign = s;
  }
}

Expression compatibility_residual(const model::System& sys, const Expression& phi) {
  require_scalar(sys, "compatibility check");
  const Variable y = Variable::x(1);
  const Variable t = Variable::time();
  const Variable w = Variable::w(1);
  const Expression& F = sys.drift(0);
  const Expression& S = sys.diffusion(0, 0);
  const Expression gamma = expr::simplify(differentiate(constant(1.0) / phi, w));
  const Expression gamma_w = differentiate(gamma, w);
  return S * differentiate(gamma, t) + differentiate(S, t) * gamma - F * gamma_w -
         constant(0.5) * (S * differentiate(gamma_w, w) + S * S * differentiate(gamma_w, y));
}

ResidualReport compatibility_check(const model::System& sys, const Expression& phi,
                                   const CheckOptions& opts) {
  require_scalar(sys, "compatibility check");
  if (sys.kind() != model::System::Kind::Ito) {
    throw Error(ErrorCode::Invariant, "compatibility check needs an Ito system");
  }
  require_nonvanishing(sys, phi, "phi");
  ResidualReport report;
  report.check = "compatibility";
  const Expression raw = compatibility_residual(sys, phi);
  report.entries.push_back({"compatibility", expr::simplify(raw), 0.0});
  const Expression gamma = differentiate(constant(1.0) / phi, Variable::w(1));
  sample_and_judge(report, {raw}, {gamma}, sys.space(), sys.domain(), opts, {phi});
  if (!expr::depends_on(phi, Variable::w(1))) report.notes.push_back("phi is w-independent: gamma = 0");
  return report;
}

KernelMembership kernel_membership(const model::System& sys, const Expression& psi,
                                   const CheckOptions& opts) {
  require_scalar(sys, "kernel membership");
  KernelMembership out;
  const Expression l = model::operator_L(sys, psi);
  const Expression m = model::operator_M(sys, psi);
  out.L.check = "kernel-L";
  out.L.entries.push_back({"L(psi)", l, 0.0});
  sample_and_judge(out.L, {l}, {psi}, sys.space(), sys.domain(), opts);
  out.M.check = "kernel-M";
  out.M.entries.push_back({"M(psi)", m, 0.0});
  sample_and_judge(out.M, {m}, {psi}, sys.space(), sys.domain(), opts);
  out.in_ker_L = out.L.pass;
  out.in_ker_M = out.M.pass;
  return out;
}

}  // namespace stochsym::symcheck
