#pragma once

#include <array>
#include <cstdint>

namespace stochsym {

// Radical-inverse (Halton) coordinate of point `index` in dimension `dim`.
// Dimensions beyond the prime table wrap around with a scrambled index.
inline double halton(std::uint64_t index, int dim) {
  static constexpr std::array<std::uint32_t, 16> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19,
                                                            23, 29, 31, 37, 41, 43, 47, 53};
  const std::uint32_t base = kPrimes[static_cast<std::size_t>(dim) % kPrimes.size()];
  std::uint64_t i = index + 1 + 409 * static_cast<std::uint64_t>(dim / kPrimes.size());
  double f = 1.0;
  double r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

}  // namespace stochsym
