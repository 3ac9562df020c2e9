#include "model/coefficients.hpp"

namespace stochsym::model {

CompiledSystem::CompiledSystem(const System& sys)
    : n_(sys.n()), m_(sys.m()), bundle_(sys.coefficients(), sys.space()) {}

void CompiledSystem::evaluate(std::span<const double> slots, std::span<double> f,
                              std::span<double> sigma, std::vector<double>& scratch) const {
  thread_local std::vector<double> out;
  out.resize(static_cast<std::size_t>(n_) * (1 + m_));
  bundle_.evaluate(slots, out, scratch);
  for (int i = 0; i < n_; ++i) f[i] = out[i];
  for (int j = 0; j < n_ * m_; ++j) sigma[j] = out[n_ + j];
}

}  // namespace stochsym::model
