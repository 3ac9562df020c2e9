#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "model/system.hpp"
#include "transform/scalar_map.hpp"

namespace stochsym::transform {

// new^i = forward^i(old, t, w);  old^i = inverse^i(new, t, w).
// Both sides use the variable names x1..xn: in `forward` they denote the old
// coordinates, in `inverse` the new ones. A scalar map built numerically
// carries `numeric`; forward and inverse stay empty when they have no
// closed form. `beta` is the additive term already included in `forward`.
struct ChangeOfVariables {
  std::vector<Expression> forward;
  std::vector<Expression> inverse;
  Expression beta;
  std::shared_ptr<const ScalarMap> numeric;
  std::vector<std::string> notes;

  int n() const;
  bool random() const;
  bool has_forward() const { return !forward.empty(); }
  bool has_inverse() const { return !inverse.empty(); }
  bool symbolic() const { return has_forward() && has_inverse(); }

  static ChangeOfVariables identity(int n);
};

// Numeric evaluation of a map, symbolic parts compiled once. Slots are
// (x..., t, w...) of the respective side. Immutable; callable concurrently.
class MapEvaluator {
 public:
  MapEvaluator(const ChangeOfVariables& cov, const expr::VariableSpace& space);
  void forward(std::span<const double> old_slots, std::span<double> out) const;
  // Throws Error(Inversion) when the map has neither a symbolic nor a
  // numeric inverse.
  void inverse(std::span<const double> new_slots, std::span<double> out) const;
  bool has_inverse() const { return has_inverse_; }

 private:
  int n_;
  std::shared_ptr<const ScalarMap> numeric_;
  bool has_forward_ = false;
  bool has_inverse_ = false;
  expr::CompiledBundle forward_;
  expr::CompiledBundle inverse_;
};

struct RoundTrip {
  double max_error = 0.0;
  int points = 0;
  bool pass = false;
};

// F(Phi(y)) = y at sample points of `old_domain`, relative tolerance `tol`.
RoundTrip check_round_trip(const ChangeOfVariables& cov, const expr::VariableSpace& space,
                           const model::Domain& old_domain, int points = 200, double tol = 1e-7);

// Scalar maps: Phi_y keeps one strict sign on the domain. Throws
// Error(Monotonicity) otherwise.
void require_monotone(const ChangeOfVariables& cov, const model::System& sys);

// Box for the new coordinates. Scalar maps use the range common to all
// sampled (t, w), so every point of the box has a preimage; systems use the
// bounding box of sampled images.
model::Domain image_domain(const ChangeOfVariables& cov, const expr::VariableSpace& space,
                           const model::Domain& old_domain);

}  // namespace stochsym::transform
