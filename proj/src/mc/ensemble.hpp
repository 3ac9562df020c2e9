#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "model/coefficients.hpp"

namespace stochsym::mc {

struct Grid {
  double t0 = 0.0;
  double dt = 1e-2;
  int steps = 100;

  double time(int k) const { return t0 + k * dt; }
  double end() const { return time(steps); }
  // steps = round((T - t0) / dt)
  static Grid until(double T, double dt, double t0 = 0.0);
};

// Wiener increments and trajectories of `paths` paths. Layouts:
//   dW[(p * steps + k) * m + j],  x[(p * (steps + 1) + k) * n + i].
// A failed path (blow-up or non-finite state) keeps its states up to the
// failure and NaN after it.
struct PathEnsemble {
  Grid grid;
  int n = 0;
  int m = 0;
  std::uint64_t seed = 0;
  int paths = 0;
  std::vector<double> dW;
  std::vector<double> x;
  std::vector<std::uint8_t> failed;

  double state(int p, int k, int i) const { return x[(static_cast<std::size_t>(p) * (grid.steps + 1) + k) * n + i]; }
  double increment(int p, int k, int j) const { return dW[(static_cast<std::size_t>(p) * grid.steps + k) * m + j]; }
  std::span<const double> increments(int p) const {
    return {dW.data() + static_cast<std::size_t>(p) * grid.steps * m, static_cast<std::size_t>(grid.steps) * m};
  }
  // w(t_k) for every k = 0..steps: running sums of the increments, w(t_0) = 0.
  std::vector<double> wiener(int p) const;
  int completed() const;
  double completion() const { return paths ? static_cast<double>(completed()) / paths : 0.0; }
  // State component i at the final time for completed paths.
  std::vector<double> final_states(int i = 0) const;
};

struct SimOptions {
  int threads = 0;  // 0: hardware concurrency
  double blowup = 1e12;
};

// Increments only (n = 0), Normal(0, dt) from the per-path streams.
PathEnsemble wiener_increments(int m, const Grid& grid, std::uint64_t seed, int paths, const SimOptions& opts = {});

// Euler-Maruyama with coefficients at the left end point:
//   x_{k+1} = x_k + f(x_k, t_k, w_k) dt + s(x_k, t_k, w_k) dW_k.
// Throws Error(Usage) if dt <= 0 or x0 has the wrong size.
PathEnsemble simulate(const model::CoefficientModel& sys, const std::vector<double>& x0, const Grid& grid,
                      std::uint64_t seed, int paths, const SimOptions& opts = {});

// Same, reusing the increments stored in `noise`.
// Throws Error(IncrementMismatch) if `noise` has no increments or a different m.
PathEnsemble simulate(const model::CoefficientModel& sys, const std::vector<double>& x0, const PathEnsemble& noise,
                      const SimOptions& opts = {});

// Columnar text: header "t x1[0] x1[1] ... x2[0] ...", one row per time step.
void write_text(const PathEnsemble& ens, std::ostream& out);
// Binary layout (little-endian): 8-byte magic "SSYMENS1", int64 n, m, paths,
// steps, float64 t0, dt, then (steps + 1) * paths * n float64 states
// row-major over [step][path][component].
void write_binary(const PathEnsemble& ens, std::ostream& out);
PathEnsemble read_binary(std::istream& in);

// Runs body(p) for p in [0, count) on up to `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace stochsym::mc
