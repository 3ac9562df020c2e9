#include "mc/rng.hpp"

#include <boost/math/distributions/normal.hpp>

namespace stochsym::mc {

namespace {

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

PathStream::PathStream(std::uint64_t seed, std::uint64_t path) : gen_(seeded(seed, path)) {}

double PathStream::uniform() {
  // 53 random bits, shifted off 0 and 1.
  return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53;
}

double PathStream::normal() {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, uniform());
}

}  // namespace stochsym::mc
