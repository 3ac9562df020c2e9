#include "model/system.hpp"

#include "common/error.hpp"

namespace stochsym::model {

Domain Domain::defaults(int n, int m) {
  Domain d;
  d.x.assign(n, Interval{-2.0, 2.0});
  d.w.assign(m, Interval{-2.0, 2.0});
  return d;
}

Interval Domain::of(Variable v) const {
  switch (v.kind) {
    case expr::VarKind::State: return x.at(v.index - 1);
    case expr::VarKind::Time: return t;
    case expr::VarKind::Noise: return w.at(v.index - 1);
  }
  return t;
}

System::System(Kind kind, VariableSpace space, std::vector<Expression> drift,
               std::vector<std::vector<Expression>> diffusion, Domain domain)
    : kind_(kind),
      space_(space),
      drift_(std::move(drift)),
      diffusion_(std::move(diffusion)),
      domain_(std::move(domain)) {
  const int n = space_.n();
  const int m = space_.m();
  if (static_cast<int>(drift_.size()) != n || static_cast<int>(diffusion_.size()) != n) {
    throw Error(ErrorCode::Dimension, "system needs " + std::to_string(n) + " drift and diffusion rows");
  }
  for (const auto& row : diffusion_) {
    if (static_cast<int>(row.size()) != m) {
      throw Error(ErrorCode::Dimension, "diffusion rows need " + std::to_string(m) + " entries");
    }
  }
  if (static_cast<int>(domain_.x.size()) != n || static_cast<int>(domain_.w.size()) != m) {
    throw Error(ErrorCode::Dimension, "domain does not match the space");
  }
  for (const auto& e : coefficients()) {
    for (const auto& v : expr::free_variables(e)) {
      if (!space_.contains(v)) {
        throw Error(ErrorCode::UnknownVariable, "coefficient references " + v.name() + " outside the space");
      }
    }
  }
  if (kind_ == Kind::Ito && references_noise()) {
    throw Error(ErrorCode::Invariant,
                "Ito system coefficients must not depend on w; declare a generalized system");
  }
}

System System::ito(VariableSpace space, std::vector<Expression> drift,
                   std::vector<std::vector<Expression>> diffusion, Domain domain) {
  return System(Kind::Ito, space, std::move(drift), std::move(diffusion), std::move(domain));
}

System System::generalized(VariableSpace space, std::vector<Expression> drift,
                           std::vector<std::vector<Expression>> diffusion, Domain domain) {
  return System(Kind::Generalized, space, std::move(drift), std::move(diffusion), std::move(domain));
}

bool System::references_noise() const {
  for (const auto& e : coefficients()) {
    if (expr::depends_on_kind(e, expr::VarKind::Noise)) return true;
  }
  return false;
}

std::vector<Expression> System::coefficients() const {
  std::vector<Expression> out(drift_);
  for (const auto& row : diffusion_) out.insert(out.end(), row.begin(), row.end());
  return out;
}

System System::with_domain(Domain d) const {
  return System(kind_, space_, drift_, diffusion_, std::move(d));
}

bool VectorField::random() const {
  for (const auto& c : coeffs) {
    if (expr::depends_on_kind(c, expr::VarKind::Noise)) return true;
  }
  return false;
}

}  // namespace stochsym::model
