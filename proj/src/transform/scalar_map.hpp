#pragma once

#include <memory>
#include <optional>

#include "expr/compiled.hpp"
#include "expr/expression.hpp"
#include "model/system.hpp"

namespace stochsym::transform {

using expr::Expression;

// Additive part B(t, w) of a scalar map Phi = Xi(y, t, w) + B(t, w), with the
// derivatives the Ito rule needs.
class AdditiveTerm {
 public:
  struct Values {
    double value = 0.0;
    double t = 0.0;
    double w = 0.0;
    double ww = 0.0;
  };
  virtual ~AdditiveTerm() = default;
  virtual Values at(double t, double w) const = 0;
  virtual std::optional<Expression> symbolic() const { return std::nullopt; }
};

class SymbolicAdditive final : public AdditiveTerm {
 public:
  explicit SymbolicAdditive(Expression b);
  Values at(double t, double w) const override;
  std::optional<Expression> symbolic() const override { return b_; }

 private:
  Expression b_;
  expr::CompiledBundle bundle_;  // B, B_t, B_w, B_ww over (x1, t, w1)
};

// B tabulated on a (t, w) grid from
//   beta(t, w) = int_0^t rt(s, 0) ds + int_0^w rw(t, v) dv,
//   B = b(t) + c w - int_0^w beta dv,  B_t = b'(t) - int_0^w rt dv,
// by cumulative trapezoid sums and bilinear interpolation. rw and rt are
// expressions in (t, w1) only. B_ww = -rw is evaluated directly.
class GridAdditive final : public AdditiveTerm {
 public:
  GridAdditive(const Expression& rw, const Expression& rt, const Expression& b_of_t, double c,
               double t_max, double w_max, double h = 1e-2);
  Values at(double t, double w) const override;

 private:
  double interp(const std::vector<double>& grid, double t, double w) const;

  double h_;
  int nt_;
  int nw_;  // w index j <-> w = (j - nw_) h
  std::vector<double> B_;
  std::vector<double> Bt_;
  std::vector<double> beta_;
  expr::CompiledExpression rw_;
  expr::CompiledBundle b_;  // b, b'
  double c_;
};

// Scalar map Phi(y, t, w) = Xi(y, t, w) + B(t, w).
// Xi is symbolic, or the quadrature int_{y0}^{y} dy' / phi(y', t, w)
// (Gauss-Kronrod, tolerance 1e-10). The inverse uses the symbolic inverse of
// Xi when one is known (y = Xi^{-1}(x - B)); otherwise a bracket grown
// geometrically from y0, bisection, then Newton.
class ScalarMap {
 public:
  struct Jet {
    double value = 0.0;
    double t = 0.0;
    double y = 0.0;
    double w = 0.0;
    double yy = 0.0;
    double yw = 0.0;
    double ww = 0.0;
  };

  static std::shared_ptr<const ScalarMap> symbolic(Expression xi, std::optional<Expression> xi_inverse,
                                                   std::shared_ptr<const AdditiveTerm> additive,
                                                   model::Interval y_domain);
  static std::shared_ptr<const ScalarMap> quadrature(Expression phi, double y0,
                                                     std::shared_ptr<const AdditiveTerm> additive,
                                                     model::Interval y_domain);

  double value(double y, double t, double w) const;
  Jet jet(double y, double t, double w) const;
  // Throws Error(Inversion) when no root is bracketed.
  double inverse(double x, double t, double w) const;

  bool has_symbolic_xi() const { return xi_.has_value(); }
  const std::optional<Expression>& xi() const { return xi_; }
  const std::optional<Expression>& xi_inverse() const { return xi_inverse_; }
  const std::optional<Expression>& phi() const { return phi_; }
  double y0() const { return y0_; }
  const AdditiveTerm* additive() const { return additive_.get(); }
  std::string describe() const;

 private:
  ScalarMap() = default;
  double xi_value(double y, double t, double w) const;
  double integrate(int which, double y, double t, double w) const;

  std::optional<Expression> xi_;
  std::optional<Expression> xi_inverse_;
  std::optional<Expression> phi_;
  double y0_ = 0.0;
  model::Interval y_domain_;
  std::shared_ptr<const AdditiveTerm> additive_;
  // symbolic: Xi, Xi_t, Xi_y, Xi_w, Xi_yy, Xi_yw, Xi_ww
  // quadrature: g, g_t, g_w, g_ww, g_y with g = 1/phi
  expr::CompiledBundle bundle_;
  expr::CompiledExpression inverse_;
};

}  // namespace stochsym::transform
