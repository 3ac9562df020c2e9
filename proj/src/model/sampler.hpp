#pragma once

#include <vector>

#include "model/system.hpp"

namespace stochsym::model {

// Quasi-random (Halton) sample points over a Domain. A candidate point is
// rejected when any watched expression is non-finite there or any
// denominator found in them (division, negative powers, log arguments) is
// within `guard` of zero.
class Sampler {
 public:
  static constexpr double kGuard = 1e-3;

  Sampler(VariableSpace space, Domain domain, double guard = kGuard);

  // Up to `count` points, as slot vectors (x..., t, w...). Fewer are returned
  // only if 50*count candidates could not supply enough valid points.
  std::vector<std::vector<double>> sample(const std::vector<Expression>& watch, int count) const;

  const VariableSpace& space() const { return space_; }

 private:
  VariableSpace space_;
  Domain domain_;
  double guard_;
};

// Denominator-like subexpressions of e: divisors, bases of negative powers,
// log arguments.
std::vector<Expression> singular_loci(const Expression& e);

}  // namespace stochsym::model
