#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "sigtask/kernels/common.hpp"
#include "sigtask/runtime.hpp"

namespace sigtask {

struct LinearSystem {
  int n = 0;
  std::vector<double> a;  // n x n row-major
  std::vector<double> b;

  double at(int i, int j) const {
    return a[static_cast<std::size_t>(i) * n + j];
  }
};

inline bool diagonally_dominant(const LinearSystem& sys) {
  for (int i = 0; i < sys.n; ++i) {
    double off = 0.0;
    for (int j = 0; j < sys.n; ++j)
      if (j != i) off += std::abs(sys.at(i, j));
    if (!(std::abs(sys.at(i, i)) > off)) return false;
  }
  return true;
}

// Random strictly dominant system with off-diagonal magnitudes decaying away
// from the diagonal, so most of the information sits in a band.
inline LinearSystem make_dominant_system(int n, std::uint64_t seed,
                                         double dominance = 1.8) {
  if (n < 2) throw std::invalid_argument("system too small");
  LinearSystem sys;
  sys.n = n;
  sys.a.resize(static_cast<std::size_t>(n) * n);
  sys.b.resize(static_cast<std::size_t>(n));
  std::mt19937_64 rng(mix_seed(seed, 0x6a61636f6269ull));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double decay = static_cast<double>(n) / 12.0;
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v =
          u(rng) * std::exp(-std::abs(i - j) / decay);
      sys.a[static_cast<std::size_t>(i) * n + j] = v;
      off += std::abs(v);
    }
    sys.a[static_cast<std::size_t>(i) * n + i] =
        dominance * off + 1.0;
    sys.b[static_cast<std::size_t>(i)] = 10.0 * u(rng);
  }
  return sys;
}

namespace detail {

inline constexpr int kJacobiBlocks = 8;

// Partial row sums for rows [r0, r1) over columns [c0, c1).
inline void jacobi_partial(const LinearSystem& sys,
                           const std::vector<double>& x, int r0, int r1,
                           int c0, int c1, std::vector<double>& out) {
  for (int i = r0; i < r1; ++i) {
    double acc = 0.0;
    const double* row = sys.a.data() + static_cast<std::size_t>(i) * sys.n;
    for (int j = c0; j < c1; ++j) {
      if (j == i) continue;
      acc += row[j] * x[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i - r0)] = acc;
  }
}

// Combines a row block's partials into the next iterate and records the
// block's largest update.
inline void jacobi_reduce(const LinearSystem& sys,
                          const std::vector<double>& x_cur,
                          const std::vector<std::vector<double>>& partials,
                          int rb, int r0, int r1, int blocks,
                          std::vector<double>& x_next,
                          std::vector<double>& block_delta) {
  double delta = 0.0;
  for (int i = r0; i < r1; ++i) {
    double acc = 0.0;
    for (int cb = 0; cb < blocks; ++cb)
      acc += partials[static_cast<std::size_t>(rb * blocks + cb)]
                     [static_cast<std::size_t>(i - r0)];
    const double next =
        (sys.b[static_cast<std::size_t>(i)] - acc) / sys.at(i, i);
    delta = std::max(delta, std::abs(next - x_cur[static_cast<std::size_t>(i)]));
    x_next[static_cast<std::size_t>(i)] = next;
  }
  block_delta[static_cast<std::size_t>(rb)] = delta;
}

// Blocks whose column range lies outside the diagonal band (half-bandwidth
// n/8, i.e. anything beyond the neighbouring block) belong to the upper
// right / lower left areas that the first sweeps drop.
inline bool jacobi_out_of_band(int rb, int cb) {
  return std::abs(rb - cb) >= 2;
}

}  // namespace detail

struct JacobiOptions {
  double tolerance = kJacobiNativeTolerance;
  int approx_sweeps = 5;  // 0 disables the dropped-block phase
  int max_sweeps = 100000;
};

struct JacobiResult {
  std::vector<double> x;
  int sweeps = 0;
  bool converged = false;
  double wall_secs = 0.0;
};

// Sequential accurate iteration with the same blockwise summation order.
inline JacobiResult jacobi_reference(const LinearSystem& sys,
                                     double tolerance,
                                     int max_sweeps = 100000) {
  if (!diagonally_dominant(sys))
    throw std::invalid_argument("system is not strictly diagonally dominant");
  const int n = sys.n;
  const int blocks = detail::kJacobiBlocks;
  const int bs = (n + blocks - 1) / blocks;
  JacobiResult res;
  res.x.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> x_next(static_cast<std::size_t>(n), 0.0);
  std::vector<std::vector<double>> partials(
      static_cast<std::size_t>(blocks * blocks));
  std::vector<double> block_delta(static_cast<std::size_t>(blocks), 0.0);
  for (auto& p : partials) p.assign(static_cast<std::size_t>(bs), 0.0);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    res.sweeps = sweep;
    for (int rb = 0; rb < blocks; ++rb) {
      const int r0 = rb * bs, r1 = std::min(n, r0 + bs);
      if (r0 >= r1) continue;
      for (int cb = 0; cb < blocks; ++cb) {
        const int c0 = cb * bs, c1 = std::min(n, c0 + bs);
        if (c0 >= c1) continue;
        detail::jacobi_partial(sys, res.x, r0, r1, c0, c1,
                               partials[static_cast<std::size_t>(rb * blocks + cb)]);
      }
    }
    for (int rb = 0; rb < blocks; ++rb) {
      const int r0 = rb * bs, r1 = std::min(n, r0 + bs);
      if (r0 >= r1) continue;
      detail::jacobi_reduce(sys, res.x, partials, rb, r0, r1, blocks, x_next,
                            block_delta);
    }
    double delta = 0.0;
    for (double d : block_delta) delta = std::max(delta, d);
    res.x.swap(x_next);
    if (delta < tolerance) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// Task-parallel solve. The first approx_sweeps sweeps drop the out-of-band
// partial tasks (significance 0, no approximate body); their contributions
// stay at the stale/zero value. Everything afterwards runs accurately until
// the successive-iterate infinity norm drops below the tolerance.
inline JacobiResult jacobi_run(const LinearSystem& sys, JacobiOptions opt,
                               Runtime& rt, KernelTuning tuning = {}) {
  if (!diagonally_dominant(sys))
    throw std::invalid_argument("system is not strictly diagonally dominant");
  const int n = sys.n;
  const int blocks = detail::kJacobiBlocks;
  const int bs = (n + blocks - 1) / blocks;

  JacobiResult res;
  res.x.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> x_next(static_cast<std::size_t>(n), 0.0);
  std::vector<std::vector<double>> partials(
      static_cast<std::size_t>(blocks * blocks));
  std::vector<double> block_delta(static_cast<std::size_t>(blocks), 0.0);
  for (auto& p : partials) p.assign(static_cast<std::size_t>(bs), 0.0);

  const LinearSystem* sp = &sys;
  std::vector<double>* x_cur = &res.x;
  std::vector<double>* xn = &x_next;
  std::vector<std::vector<double>>* parts = &partials;
  std::vector<double>* deltas = &block_delta;

  auto x_region = [](int rb) {
    return RegionId::token(0x500 + static_cast<std::uint64_t>(rb));
  };
  auto partial_region = [blocks](int rb, int cb) {
    return RegionId::token(0x600 +
                           static_cast<std::uint64_t>(rb * blocks + cb));
  };

  const GroupId g = rt.init_group("jacobi", tuning.ratio_override.value_or(1.0));
  const std::uint64_t t0 = now_ns();
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    res.sweeps = sweep;
    const bool approx_phase = sweep <= opt.approx_sweeps;
    for (int rb = 0; rb < blocks; ++rb) {
      const int r0 = rb * bs, r1 = std::min(n, r0 + bs);
      if (r0 >= r1) continue;
      for (int cb = 0; cb < blocks; ++cb) {
        const int c0 = cb * bs, c1 = std::min(n, c0 + bs);
        if (c0 >= c1) continue;
        const bool dropped =
            approx_phase && detail::jacobi_out_of_band(rb, cb);
        const double sig =
            tuning.significance_override.value_or(dropped ? 0.0 : 1.0);
        const RegionId inputs[] = {x_region(cb)};
        const RegionId outputs[] = {partial_region(rb, cb)};
        const int pi = rb * blocks + cb;
        rt.spawn(
            g, Significance(sig),
            [sp, x_cur, r0, r1, c0, c1, parts, pi] {
              detail::jacobi_partial(*sp, *x_cur, r0, r1, c0, c1,
                                     (*parts)[static_cast<std::size_t>(pi)]);
            },
            TaskBody{}, inputs, outputs);
      }
    }
    for (int rb = 0; rb < blocks; ++rb) {
      const int r0 = rb * bs, r1 = std::min(n, r0 + bs);
      if (r0 >= r1) continue;
      std::vector<RegionId> inputs;
      inputs.reserve(static_cast<std::size_t>(blocks));
      for (int cb = 0; cb < blocks; ++cb)
        inputs.push_back(partial_region(rb, cb));
      const RegionId outputs[] = {x_region(rb)};
      const double sig = tuning.significance_override.value_or(1.0);
      rt.spawn(
          g, Significance(sig),
          [sp, x_cur, parts, rb, r0, r1, blocks, xn, deltas] {
            detail::jacobi_reduce(*sp, *x_cur, *parts, rb, r0, r1, blocks,
                                  *xn, *deltas);
          },
          TaskBody{}, std::span<const RegionId>(inputs),
          std::span<const RegionId>(outputs));
    }
    rt.wait_group(g);
    double delta = 0.0;
    for (double d : block_delta) delta = std::max(delta, d);
    res.x.swap(x_next);
    if (sweep > opt.approx_sweeps && delta < opt.tolerance) {
      res.converged = true;
      break;
    }
  }
  res.wall_secs = static_cast<double>(now_ns() - t0) * 1e-9;
  return res;
}

}  // namespace sigtask
