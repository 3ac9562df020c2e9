#include "symcheck/report.hpp"

#include <cmath>

#include "common/error.hpp"
#include "expr/compiled.hpp"
#include "model/sampler.hpp"

namespace stochsym::symcheck {

void sample_and_judge(ResidualReport& report, const std::vector<Expression>& residuals,
                      const std::vector<Expression>& scale_exprs, const expr::VariableSpace& space,
                      const model::Domain& domain, const CheckOptions& opts,
                      const std::vector<Expression>& extra_watch) {
  std::vector<Expression> watch(residuals);
  watch.insert(watch.end(), scale_exprs.begin(), scale_exprs.end());
  watch.insert(watch.end(), extra_watch.begin(), extra_watch.end());
  const model::Sampler sampler(space, domain);
  const auto points = sampler.sample(watch, opts.points);
  if (points.empty()) {
    throw Error(ErrorCode::DegenerateSampling,
                report.check + ": no sample point of the domain avoids the singular loci");
  }

  std::vector<Expression> all(residuals);
  all.insert(all.end(), scale_exprs.begin(), scale_exprs.end());
  const expr::CompiledBundle bundle(all, space);
  std::vector<double> values(all.size());
  std::vector<double> scratch;
  std::vector<double> max_abs(residuals.size(), 0.0);
  double max_scale = 0.0;
  // Points are visited in index order, so the maxima do not depend on how
  // the work might be split.
  for (const auto& p : points) {
    bundle.evaluate(p, values, scratch);
    for (std::size_t j = 0; j < residuals.size(); ++j) {
      max_abs[j] = std::max(max_abs[j], std::abs(values[j]));
    }
    for (std::size_t j = residuals.size(); j < all.size(); ++j) {
      max_scale = std::max(max_scale, std::abs(values[j]));
    }
  }
  report.max_residual = 0.0;
  for (std::size_t j = 0; j < residuals.size(); ++j) {
    report.entries[j].max_abs = max_abs[j];
    report.max_residual = std::max(report.max_residual, max_abs[j]);
  }
  report.scale = 1.0 + max_scale;
  report.tol = opts.tol;
  report.points = static_cast<int>(points.size());
  report.pass = report.max_residual < opts.tol * report.scale;
}

}  // namespace stochsym::symcheck
