#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "common/halton.hpp"
#include "expr/expression.hpp"
#include "expr/parser.hpp"
#include "model/system.hpp"

namespace stochsym::testing {

inline expr::Expression P(const std::string& text, int n = 1, int m = 1) {
  return expr::parse(text, expr::VariableSpace(n, m));
}

// Scalar Ito system dy = f dt + s dw with y in [lo, hi].
inline model::System scalar_system(const std::string& f, const std::string& s, double lo = -2.0,
                                   double hi = 2.0) {
  auto d = model::Domain::defaults(1, 1);
  d.x[0] = {lo, hi};
  return model::System::ito(expr::VariableSpace(1, 1), {P(f)}, {{P(s)}}, d);
}

inline model::VectorField field(std::initializer_list<std::string> coeffs, int n = 1, int m = 1) {
  model::VectorField X;
  for (const auto& c : coeffs) X.coeffs.push_back(P(c, n, m));
  return X;
}

// Point in [lo, hi]^(n+1+m) from the Halton sequence.
inline expr::Point box_point(int i, int n, int m, double lo, double hi) {
  std::vector<double> slots(n + 1 + m);
  for (int k = 0; k < n + 1 + m; ++k) slots[k] = lo + (hi - lo) * halton(i + 7, k);
  return expr::Point::from_slots(slots, n, m);
}

// Largest |a - b| / (1 + |b|) over points where both sides are finite;
// `valid` receives the count of such points.
inline double sampled_rel_diff(const expr::Expression& a, const expr::Expression& b, int n, int m,
                               double lo, double hi, int points, int* valid = nullptr) {
  double worst = 0.0;
  int ok = 0;
  for (int i = 0; i < points; ++i) {
    const auto p = box_point(i, n, m, lo, hi);
    const double va = expr::evaluate_or_nan(a, p);
    const double vb = expr::evaluate_or_nan(b, p);
    if (!std::isfinite(va) || !std::isfinite(vb)) continue;
    ++ok;
    worst = std::max(worst, std::abs(va - vb) / (1.0 + std::abs(vb)));
  }
  if (valid) *valid = ok;
  return worst;
}

// Random expression over x1, t, w1 using every node type. Arguments of log,
// sqrt and non-integer powers are wrapped so they stay positive.
class RandomExpr {
 public:
  explicit RandomExpr(std::uint64_t seed) : rng_(seed) {}

  expr::Expression make(int depth) {
    using namespace expr;
    if (depth == 0 || pick(4) == 0) return leaf();
    switch (pick(12)) {
      case 0: return make(depth - 1) + make(depth - 1);
      case 1: return make(depth - 1) - make(depth - 1);
      case 2: return make(depth - 1) * make(depth - 1);
      case 3: return make(depth - 1) / (constant(2.0) + positive(depth - 1));
      case 4: return -make(depth - 1);
      case 5: return exp(scaled(depth - 1));
      case 6: return log(constant(0.5) + positive(depth - 1));
      case 7: return sin(make(depth - 1));
      case 8: return cos(make(depth - 1));
      case 9: return sqrt(constant(0.25) + positive(depth - 1));
      case 10: return pow(make(depth - 1), constant(static_cast<double>(pick(4))));
      default: return pow(constant(0.5) + positive(depth - 1), scaled(depth - 1));
    }
  }

 private:
  int pick(int k) { return std::uniform_int_distribution<int>(0, k - 1)(rng_); }

  expr::Expression leaf() {
    using expr::Variable;
    switch (pick(4)) {
      case 0: return expr::var(Variable::x(1));
      case 1: return expr::var(Variable::time());
      case 2: return expr::var(Variable::w(1));
      default: return expr::constant(std::round(std::uniform_real_distribution<double>(-3, 3)(rng_) * 4) / 4);
    }
  }

  // Keeps exp and pow arguments moderate.
  expr::Expression scaled(int depth) { return expr::sin(make(depth)); }

  expr::Expression positive(int depth) {
    auto e = make(depth);
    return e * e;
  }

  std::mt19937_64 rng_;
};

}  // namespace stochsym::testing
