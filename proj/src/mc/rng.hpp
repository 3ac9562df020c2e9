#pragma once

#include <cstdint>
#include <random>

namespace stochsym::mc {

// Independent stream for one path: mt19937_64 seeded from (seed, path) via
// seed_seq, standard normals by the inverse normal CDF of a uniform in
// (0, 1). Depends only on (seed, path), never on scheduling.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path);
  double uniform();
  double normal();

 private:
  std::mt19937_64 gen_;
};

}  // namespace stochsym::mc
