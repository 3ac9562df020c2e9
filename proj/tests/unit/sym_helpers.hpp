#pragma once

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "expr/compiled.hpp"
#include "model/sampler.hpp"
#include "test_support.hpp"
#include "transform/change_of_variables.hpp"

namespace stochsym::testing {

// Largest |a - b| / (1 + |b|) at sample points of `domain`.
inline double diff_on(const expr::Expression& a, const expr::Expression& b, const expr::VariableSpace& space,
                      const model::Domain& domain, int points = 200) {
  const auto pts = model::Sampler(space, domain).sample({a, b}, points);
  EXPECT_GT(pts.size(), points / 2u);
  const expr::CompiledBundle bundle({a, b}, space);
  std::vector<double> v(2), scratch;
  double worst = 0.0;
  for (const auto& p : pts) {
    bundle.evaluate(p, v, scratch);
    worst = std::max(worst, std::abs(v[0] - v[1]) / (1.0 + std::abs(v[1])));
  }
  return worst;
}

inline transform::ChangeOfVariables map_of(std::vector<std::string> fwd, std::vector<std::string> inv, int n = 1,
                                           int m = 1) {
  transform::ChangeOfVariables c;
  for (const auto& f : fwd) c.forward.push_back(P(f, n, m));
  for (const auto& f : inv) c.inverse.push_back(P(f, n, m));
  c.beta = expr::constant(0.0);
  return c;
}

}  // namespace stochsym::testing
