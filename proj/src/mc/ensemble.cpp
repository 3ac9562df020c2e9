#include "mc/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <functional>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "common/error.hpp"
#include "mc/rng.hpp"

namespace stochsym::mc {

namespace {

constexpr char kMagic[8] = {'S', 'S', 'Y', 'M', 'E', 'N', 'S', '1'};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  out.write(reinterpret_cast<const char*>(&bits), 8);
}

template <typename T>
T get(std::istream& in) {
  std::uint64_t bits = 0;
  if (!in.read(reinterpret_cast<char*>(&bits), 8)) throw Error(ErrorCode::Io, "truncated ensemble file");
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void fill_increments(PathEnsemble& e, int p) {
  PathStream rng(e.seed, static_cast<std::uint64_t>(p));
  const double s = std::sqrt(e.grid.dt);
  const std::size_t count = static_cast<std::size_t>(e.grid.steps) * e.m;
  double* out = e.dW.data() + static_cast<std::size_t>(p) * count;
  for (std::size_t i = 0; i < count; ++i) out[i] = s * rng.normal();
}

}  // namespace

Grid Grid::until(double T, double dt, double t0) {
  if (!(dt > 0.0) || !(T > t0)) throw Error(ErrorCode::Usage, "grid needs dt > 0 and T > t0");
  return Grid{t0, dt, static_cast<int>(std::lround((T - t0) / dt))};
}

std::vector<double> PathEnsemble::wiener(int p) const {
  std::vector<double> w(static_cast<std::size_t>(grid.steps + 1) * m, 0.0);
  for (int k = 0; k < grid.steps; ++k) {
    for (int j = 0; j < m; ++j) w[(k + 1) * m + j] = w[k * m + j] + increment(p, k, j);
  }
  return w;
}

int PathEnsemble::completed() const {
  return static_cast<int>(std::count(failed.begin(), failed.end(), std::uint8_t{0}));
}

std::vector<double> PathEnsemble::final_states(int i) const {
  std::vector<double> out;
  for (int p = 0; p < paths; ++p) {
    if (!failed[p]) out.push_back(state(p, grid.steps, i));
  }
  return out;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, std::max(count, 1));
  if (threads == 1) {
    for (int p = 0; p < count; ++p) body(p);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex mu;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int p = w; p < count; p += threads) body(p);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

PathEnsemble wiener_increments(int m, const Grid& grid, std::uint64_t seed, int paths, const SimOptions& opts) {
  if (!(grid.dt > 0.0) || grid.steps < 0 || paths < 0) throw Error(ErrorCode::Usage, "invalid grid or path count");
  PathEnsemble e;
  e.grid = grid;
  e.m = m;
  e.seed = seed;
  e.paths = paths;
  e.dW.resize(static_cast<std::size_t>(paths) * grid.steps * m);
  e.failed.assign(paths, 0);
  parallel_for(paths, opts.threads, [&](int p) { fill_increments(e, p); });
  return e;
}

PathEnsemble simulate(const model::CoefficientModel& sys, const std::vector<double>& x0, const Grid& grid,
                      std::uint64_t seed, int paths, const SimOptions& opts) {
  return simulate(sys, x0, wiener_increments(sys.m(), grid, seed, paths, opts), opts);
}

PathEnsemble simulate(const model::CoefficientModel& sys, const std::vector<double>& x0, const PathEnsemble& noise,
                      const SimOptions& opts) {
  const int n = sys.n();
  const int m = sys.m();
  if (static_cast<int>(x0.size()) != n) throw Error(ErrorCode::Usage, "initial state has the wrong dimension");
  if (noise.m != m || noise.dW.size() != static_cast<std::size_t>(noise.paths) * noise.grid.steps * m) {
    throw Error(ErrorCode::IncrementMismatch, "ensemble has no stored increments for m = " + std::to_string(m));
  }
  PathEnsemble e;
  e.grid = noise.grid;
  e.n = n;
  e.m = m;
  e.seed = noise.seed;
  e.paths = noise.paths;
  e.dW = noise.dW;
  e.failed.assign(e.paths, 0);
  const int steps = e.grid.steps;
  e.x.assign(static_cast<std::size_t>(e.paths) * (steps + 1) * n, kNaN);
  parallel_for(e.paths, opts.threads, [&](int p) {
    std::vector<double> slots(n + 1 + m, 0.0), f(n), s(static_cast<std::size_t>(n) * m), scratch;
    double* xp = e.x.data() + static_cast<std::size_t>(p) * (steps + 1) * n;
    std::copy(x0.begin(), x0.end(), xp);
    for (int k = 0; k < steps; ++k) {
      const double* cur = xp + static_cast<std::size_t>(k) * n;
      std::copy(cur, cur + n, slots.begin());
      slots[n] = e.grid.time(k);
      sys.evaluate(slots, f, s, scratch);
      double* next = xp + static_cast<std::size_t>(k + 1) * n;
      bool ok = true;
      for (int i = 0; i < n; ++i) {
        double v = cur[i] + f[i] * e.grid.dt;
        for (int j = 0; j < m; ++j) v += s[static_cast<std::size_t>(i) * m + j] * e.increment(p, k, j);
        next[i] = v;
        ok = ok && std::isfinite(v) && std::abs(v) <= opts.blowup;
      }
      if (!ok) {
        std::fill(next, next + n, kNaN);
        e.failed[p] = 1;
        break;
      }
      for (int j = 0; j < m; ++j) slots[n + 1 + j] += e.increment(p, k, j);
    }
  });
  return e;
}

void write_text(const PathEnsemble& ens, std::ostream& out) {
  out << "t";
  for (int i = 0; i < ens.n; ++i) {
    for (int p = 0; p < ens.paths; ++p) out << " x" << (i + 1) << "[" << p << "]";
  }
  out << "\n";
  out.precision(17);
  for (int k = 0; k <= ens.grid.steps; ++k) {
    out << ens.grid.time(k);
    for (int i = 0; i < ens.n; ++i) {
      for (int p = 0; p < ens.paths; ++p) out << " " << ens.state(p, k, i);
    }
    out << "\n";
  }
}

void write_binary(const PathEnsemble& ens, std::ostream& out) {
  out.write(kMagic, 8);
  put<std::int64_t>(out, ens.n);
  put<std::int64_t>(out, ens.m);
  put<std::int64_t>(out, ens.paths);
  put<std::int64_t>(out, ens.grid.steps);
  put<double>(out, ens.grid.t0);
  put<double>(out, ens.grid.dt);
  for (int k = 0; k <= ens.grid.steps; ++k) {
    for (int p = 0; p < ens.paths; ++p) {
      for (int i = 0; i < ens.n; ++i) put<double>(out, ens.state(p, k, i));
    }
  }
}

PathEnsemble read_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw Error(ErrorCode::Io, "not an ensemble file");
  PathEnsemble e;
  e.n = static_cast<int>(get<std::int64_t>(in));
  e.m = static_cast<int>(get<std::int64_t>(in));
  e.paths = static_cast<int>(get<std::int64_t>(in));
  e.grid.steps = static_cast<int>(get<std::int64_t>(in));
  e.grid.t0 = get<double>(in);
  e.grid.dt = get<double>(in);
  if (e.n < 0 || e.m < 0 || e.paths < 0 || e.grid.steps < 0) throw Error(ErrorCode::Io, "corrupt ensemble header");
  e.x.resize(static_cast<std::size_t>(e.paths) * (e.grid.steps + 1) * e.n);
  e.failed.assign(e.paths, 0);
  for (int k = 0; k <= e.grid.steps; ++k) {
    for (int p = 0; p < e.paths; ++p) {
      for (int i = 0; i < e.n; ++i) {
        const double v = get<double>(in);
        e.x[(static_cast<std::size_t>(p) * (e.grid.steps + 1) + k) * e.n + i] = v;
        if (!std::isfinite(v)) e.failed[p] = 1;
      }
    }
  }
  return e;
}

}  // namespace stochsym::mc
