#pragma once

#include <string>
#include <vector>

#include "expr/expression.hpp"

namespace stochsym::model {

using expr::Expression;
using expr::Variable;
using expr::VariableSpace;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

// Per-variable sampling box.
struct Domain {
  std::vector<Interval> x;
  Interval t{0.1, 2.0};
  std::vector<Interval> w;

  static Domain defaults(int n, int m);
  Interval of(Variable v) const;
  bool operator==(const Domain&) const = default;
};

// dx^i = f^i dt + s^i_k dw^k. An Ito system has coefficients free of w; a
// generalized system may reference w (transformed coefficients of random
// maps).
class System {
 public:
  enum class Kind { Ito, Generalized };

  // Throws Error(Invariant) if an Ito system references w.
  System(Kind kind, VariableSpace space, std::vector<Expression> drift,
         std::vector<std::vector<Expression>> diffusion, Domain domain);

  static System ito(VariableSpace space, std::vector<Expression> drift,
                    std::vector<std::vector<Expression>> diffusion, Domain domain);
  static System generalized(VariableSpace space, std::vector<Expression> drift,
                            std::vector<std::vector<Expression>> diffusion, Domain domain);

  Kind kind() const { return kind_; }
  const VariableSpace& space() const { return space_; }
  int n() const { return space_.n(); }
  int m() const { return space_.m(); }
  const Expression& drift(int i) const { return drift_[i]; }
  const Expression& diffusion(int i, int k) const { return diffusion_[i][k]; }
  const std::vector<Expression>& drift() const { return drift_; }
  const std::vector<std::vector<Expression>>& diffusion() const { return diffusion_; }
  const Domain& domain() const { return domain_; }

  bool references_noise() const;
  // Drift then diffusion, row-major.
  std::vector<Expression> coefficients() const;

  System with_domain(Domain d) const;

 private:
  Kind kind_;
  VariableSpace space_;
  std::vector<Expression> drift_;
  std::vector<std::vector<Expression>> diffusion_;
  Domain domain_;
};

// Simple generator phi^i(x,t[,w]) d/dx^i. There is no t-component by
// construction.
struct VectorField {
  std::vector<Expression> coeffs;

  bool random() const;
  int n() const { return static_cast<int>(coeffs.size()); }
};

struct SolvableChain {
  std::vector<std::string> names;
  std::vector<VectorField> fields;
};

}  // namespace stochsym::model
