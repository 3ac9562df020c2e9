#include "symcheck/chain.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "common/error.hpp"
#include "expr/compiled.hpp"
#include "model/operators.hpp"
#include "model/sampler.hpp"

namespace stochsym::symcheck {

namespace {

constexpr double kIndependenceTol = 1e-8;

std::string key(int a, int k, int b) {
  return "c[" + std::to_string(a + 1) + "," + std::to_string(k + 1) + ";" + std::to_string(b + 1) + "]";
}

}  // namespace

ResidualReport check_solvable_chain(const model::SolvableChain& chain,
                                    const expr::VariableSpace& space, const model::Domain& domain,
                                    const CheckOptions& opts) {
  const int r = static_cast<int>(chain.fields.size());
  const int n = space.n();
  for (const auto& X : chain.fields) {
    if (X.random()) {
      throw Error(ErrorCode::Unsupported,
                  "solvable-chain check is defined for w-independent fields only");
    }
    if (X.n() != n) throw Error(ErrorCode::Dimension, "chain field dimension does not match the space");
  }
  ResidualReport report;
  report.check = "solvable-chain";
  report.tol = opts.tol;
  if (r == 0) {
    report.pass = true;
    return report;
  }

  std::vector<Expression> watch;
  for (const auto& X : chain.fields) watch.insert(watch.end(), X.coeffs.begin(), X.coeffs.end());
  struct Bracket {
    int a;
    int k;
    model::VectorField field;
  };
  std::vector<Bracket> brackets;
  for (int k = 1; k < r; ++k) {
    for (int a = 0; a < k; ++a) {
      brackets.push_back({a, k, model::commutator(chain.fields[a], chain.fields[k])});
      watch.insert(watch.end(), brackets.back().field.coeffs.begin(), brackets.back().field.coeffs.end());
    }
  }
  const model::Sampler sampler(space, domain);
  const auto points = sampler.sample(watch, opts.points);
  if (points.empty()) throw Error(ErrorCode::DegenerateSampling, "no valid sample point for the chain");
  report.points = static_cast<int>(points.size());
  const expr::CompiledBundle bundle(watch, space);
  std::vector<std::vector<double>> values(points.size(), std::vector<double>(watch.size()));
  std::vector<double> scratch;
  for (std::size_t p = 0; p < points.size(); ++p) bundle.evaluate(points[p], values[p], scratch);
  auto field_value = [&](std::size_t p, int field, int i) { return values[p][static_cast<std::size_t>(field) * n + i]; };
  auto bracket_value = [&](std::size_t p, std::size_t j, int i) {
    return values[p][static_cast<std::size_t>(r) * n + j * n + i];
  };

  // Pointwise independence of the generators.
  double min_sv = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < points.size(); ++p) {
    Eigen::MatrixXd G(n, r);
    for (int b = 0; b < r; ++b) {
      for (int i = 0; i < n; ++i) G(i, b) = field_value(p, b, i);
    }
    for (int b = 0; b < r; ++b) {
      const double norm = G.col(b).norm();
      if (norm > 0) G.col(b) /= norm;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
    const auto& sv = svd.singularValues();
    min_sv = std::min(min_sv, r <= n ? sv[r - 1] : 0.0);
  }
  report.values["min-independence"] = min_sv;
  report.values["independent"] = min_sv > kIndependenceTol ? 1.0 : 0.0;
  if (min_sv <= kIndependenceTol) report.notes.push_back("generators are linearly dependent at some sample point");

  double max_bracket = 0.0;
  for (std::size_t j = 0; j < brackets.size(); ++j) {
    const auto& br = brackets[j];
    const int k = br.k;
    const Eigen::Index rows = static_cast<Eigen::Index>(points.size()) * n;
    Eigen::MatrixXd A(rows, k);
    Eigen::VectorXd rhs(rows);
    for (std::size_t p = 0; p < points.size(); ++p) {
      for (int i = 0; i < n; ++i) {
        const Eigen::Index row = static_cast<Eigen::Index>(p) * n + i;
        for (int b = 0; b < k; ++b) A(row, b) = field_value(p, b, i);
        rhs[row] = bracket_value(p, j, i);
        max_bracket = std::max(max_bracket, std::abs(rhs[row]));
      }
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(rhs);
    const double resid = (A * c - rhs).cwiseAbs().maxCoeff();
    for (int b = 0; b < k; ++b) {
      const double v = std::abs(c[b]) < 1e-13 ? 0.0 : c[b];
      report.values[key(br.a, k, b)] = v;
    }
    std::string label = "[X" + std::to_string(br.a + 1) + ",X" + std::to_string(k + 1) + "]";
    std::string components;
    for (const auto& c_i : br.field.coeffs) {
      components += components.empty() ? "(" : ", ";
      components += expr::to_string(c_i);
    }
    report.notes.push_back(label + " = " + components + ")");
    report.entries.push_back({label, br.field.coeffs.empty() ? Expression() : br.field.coeffs[0], resid});
    report.max_residual = std::max(report.max_residual, resid);
  }
  report.scale = 1.0 + max_bracket;
  report.pass = report.max_residual < opts.tol * report.scale;
  return report;
}

}  // namespace stochsym::symcheck
