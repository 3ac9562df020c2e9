#include "symcheck/search.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "common/error.hpp"
#include "expr/compiled.hpp"
#include "model/sampler.hpp"
#include "symcheck/residuals.hpp"

namespace stochsym::symcheck {

namespace {

constexpr double kCutoff = 1e-8;
constexpr double kPivotTol = 1e-10;
constexpr double kRowFloor = 1e-10;

// Rows of `basis` (d x K) brought to reduced row echelon form, then
// orthonormalised in order. The row space is unchanged, and the result no
// longer depends on the rotation the SVD happened to return.
Eigen::MatrixXd canonical_basis(Eigen::MatrixXd basis) {
  const Eigen::Index d = basis.rows();
  const Eigen::Index K = basis.cols();
  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < K && row < d; ++col) {
    Eigen::Index pivot = row;
    for (Eigen::Index r = row + 1; r < d; ++r) {
      if (std::abs(basis(r, col)) > std::abs(basis(pivot, col))) pivot = r;
    }
    if (std::abs(basis(pivot, col)) < kPivotTol) continue;
    basis.row(row).swap(basis.row(pivot));
    basis.row(row) /= basis(row, col);
    for (Eigen::Index r = 0; r < d; ++r) {
      if (r != row) basis.row(r) -= basis(r, col) * basis.row(row);
    }
    ++row;
  }
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index q = 0; q < r; ++q) basis.row(r) -= basis.row(r).dot(basis.row(q)) * basis.row(q);
    basis.row(r).normalize();
    for (Eigen::Index c = 0; c < K; ++c) {
      if (std::abs(basis(r, c)) > 1e-12) {
        if (basis(r, c) < 0) basis.row(r) *= -1.0;
        break;
      }
    }
  }
  return basis;
}

}  // namespace

SearchResult search_symmetry_ansatz(const model::System& sys,
                                    const std::vector<model::VectorField>& basis, bool random) {
  const int K = static_cast<int>(basis.size());
  if (K == 0 || K > 64) {
    throw Error(ErrorCode::Usage, "ansatz basis must have between 1 and 64 elements");
  }
  std::vector<Expression> residuals;  // K blocks of E equations
  for (const auto& b : basis) {
    if (!random && b.random()) {
      throw Error(ErrorCode::Invariant, "basis element depends on w; search with --random");
    }
    auto r = residual_expressions(sys, b, random);
    residuals.insert(residuals.end(), r.begin(), r.end());
  }
  const int E = static_cast<int>(residuals.size()) / K;
  std::vector<Expression> watch(residuals);
  for (const auto& b : basis) watch.insert(watch.end(), b.coeffs.begin(), b.coeffs.end());

  const int N = 50 * K;
  const model::Sampler sampler(sys.space(), sys.domain());
  const auto points = sampler.sample(watch, N);
  const expr::CompiledBundle bundle(residuals, sys.space());

  std::vector<Eigen::VectorXd> raw_rows;
  std::vector<double> values(residuals.size());
  std::vector<double> scratch;
  double max_norm = 0.0;
  for (const auto& p : points) {
    bundle.evaluate(p, values, scratch);
    for (int e = 0; e < E; ++e) {
      Eigen::VectorXd row(K);
      for (int k = 0; k < K; ++k) row[k] = values[static_cast<std::size_t>(k) * E + e];
      if (!row.allFinite()) continue;
      max_norm = std::max(max_norm, row.norm());
      raw_rows.push_back(std::move(row));
    }
  }
  // Rows at roundoff level relative to the largest carry no information;
  // normalising them would turn noise into constraints.
  std::vector<Eigen::VectorXd> rows;
  for (const auto& row : raw_rows) {
    const double norm = row.norm();
    if (norm > kRowFloor * max_norm) rows.push_back(row / norm);
  }
  SearchResult result;
  result.points = static_cast<int>(points.size());
  result.rows = static_cast<int>(rows.size());

  if (rows.empty()) {
    // Every basis element satisfies every sampled equation exactly.
    if (static_cast<int>(points.size()) < K) {
      throw Error(ErrorCode::DegenerateSampling, "too few valid sample points for the ansatz");
    }
    for (int k = 0; k < K; ++k) {
      std::vector<double> unit(K, 0.0);
      unit[k] = 1.0;
      result.null_space.push_back(std::move(unit));
    }
    result.singular_values.assign(K, 0.0);
    return result;
  }
  if (result.rows < K) {
    throw Error(ErrorCode::DegenerateSampling,
                "only " + std::to_string(result.rows) + " usable rows for " + std::to_string(K) +
                    " unknowns");
  }

  Eigen::MatrixXd A(rows.size(), K);
  for (std::size_t r = 0; r < rows.size(); ++r) A.row(static_cast<Eigen::Index>(r)) = rows[r];
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  result.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double smax = sv.size() ? sv[0] : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] >= kCutoff * smax) ++rank;
  }
  const int nullity = K - rank;
  if (nullity == 0) return result;
  Eigen::MatrixXd null = svd.matrixV().rightCols(nullity).transpose();
  null = canonical_basis(null);
  for (Eigen::Index r = 0; r < null.rows(); ++r) {
    std::vector<double> v(K);
    for (int k = 0; k < K; ++k) v[k] = null(r, k);
    result.null_space.push_back(std::move(v));
  }
  return result;
}

}  // namespace stochsym::symcheck
