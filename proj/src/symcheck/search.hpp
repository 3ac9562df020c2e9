#pragma once

#include <vector>

#include "model/system.hpp"
#include "symcheck/report.hpp"

namespace stochsym::symcheck {

struct SearchResult {
  std::vector<std::vector<double>> null_space;  // orthonormal, canonical
  std::vector<double> singular_values;          // descending
  int rows = 0;
  int points = 0;
};

// phi = sum_k c_k b_k. The determining equations are linear in phi, so
// sampling them at 50*K points gives A c = 0. Returns an orthonormal basis
// of the numerical null space (singular values < 1e-8 sigma_max), in reduced
// row echelon order, Gram-Schmidt orthonormalised, first nonzero component
// positive. Throws Error(DegenerateSampling) if fewer than K usable rows.
SearchResult search_symmetry_ansatz(const model::System& sys,
                                    const std::vector<model::VectorField>& basis, bool random);

}  // namespace stochsym::symcheck
