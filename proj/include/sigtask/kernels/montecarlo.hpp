#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "sigtask/kernels/common.hpp"
#include "sigtask/runtime.hpp"

namespace sigtask {

// Monte Carlo estimation of a Laplace solution on the boundary of an inner
// subdomain of the unit square: one task per subdomain-boundary point, each
// averaging the outer-boundary values hit by random walks started there.
struct McConfig {
  int points = 64;           // samples along the subdomain boundary
  int walks_per_task = 256;  // accurate walk count per point
  double step = 1.0 / 96.0;  // lattice step of the accurate walk
  std::uint64_t seed = 1;
  enum class Boundary { Harmonic, One } boundary = Boundary::Harmonic;

  double boundary_value(double x, double y) const {
    switch (boundary) {
      // Harmonic with a constant offset so estimates sit away from zero.
      case Boundary::Harmonic: return x * x - y * y + 2.0;
      case Boundary::One: return 1.0;
    }
    return 0.0;
  }
};

namespace detail {

inline double border_distance(double x, double y) {
  return std::min(std::min(x, y), std::min(1.0 - x, 1.0 - y));
}

// Projects an almost-escaped walk onto the nearest outer edge.
inline void snap_to_border(double& x, double& y) {
  const double d = border_distance(x, y);
  if (d == x) x = 0.0;
  else if (d == y) y = 0.0;
  else if (d == 1.0 - x) x = 1.0;
  else y = 1.0;
}

// Fixed-step lattice walk until the outer boundary is reached.
inline double walk_accurate(const McConfig& cfg, double x, double y,
                            std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dir(0, 3);
  while (border_distance(x, y) > cfg.step) {
    switch (dir(rng)) {
      case 0: x += cfg.step; break;
      case 1: x -= cfg.step; break;
      case 2: y += cfg.step; break;
      default: y -= cfg.step; break;
    }
  }
  snap_to_border(x, y);
  return cfg.boundary_value(x, y);
}

// Lighter methodology for choosing how far the next move goes: jump straight
// to a random point of the largest circle that fits inside the domain.
inline double walk_spheres(const McConfig& cfg, double x, double y,
                           std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  double r = border_distance(x, y);
  while (r > cfg.step) {
    const double a = angle(rng);
    x += r * std::cos(a);
    y += r * std::sin(a);
    x = std::min(1.0, std::max(0.0, x));
    y = std::min(1.0, std::max(0.0, y));
    r = border_distance(x, y);
  }
  snap_to_border(x, y);
  return cfg.boundary_value(x, y);
}

// Point i on the perimeter of the centered square with side 0.5.
inline void subdomain_point(const McConfig& cfg, int i, double& x, double& y) {
  const double lo = 0.25, side = 0.5;
  const double t = 4.0 * side * static_cast<double>(i) /
                   static_cast<double>(cfg.points);
  const double leg = std::fmod(t, 4.0 * side);
  if (leg < side) {
    x = lo + leg;
    y = lo;
  } else if (leg < 2 * side) {
    x = lo + side;
    y = lo + (leg - side);
  } else if (leg < 3 * side) {
    x = lo + side - (leg - 2 * side);
    y = lo + side;
  } else {
    x = lo;
    y = lo + side - (leg - 3 * side);
  }
}

inline double estimate_point_accurate(const McConfig& cfg, int i) {
  double x, y;
  subdomain_point(cfg, i, x, y);
  std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(i)));
  double acc = 0.0;
  for (int w = 0; w < cfg.walks_per_task; ++w)
    acc += walk_accurate(cfg, x, y, rng);
  return acc / static_cast<double>(cfg.walks_per_task);
}

// Approximate task body: half the walks are dropped outright and the rest
// use the sphere jumps. The estimate divides by the walks actually taken.
inline double estimate_point_approx(const McConfig& cfg, int i) {
  double x, y;
  subdomain_point(cfg, i, x, y);
  std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(i)));
  const int kept = cfg.walks_per_task / 2;
  if (kept == 0) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (int w = 0; w < kept; ++w) acc += walk_spheres(cfg, x, y, rng);
  return acc / static_cast<double>(kept);
}

}  // namespace detail

inline std::vector<double> mc_reference(const McConfig& cfg) {
  std::vector<double> est(static_cast<std::size_t>(cfg.points));
  for (int i = 0; i < cfg.points; ++i)
    est[static_cast<std::size_t>(i)] = detail::estimate_point_accurate(cfg, i);
  return est;
}

struct McResult {
  std::vector<double> estimates;  // NaN where no walk was realized
  int undefined_count = 0;        // flagged, never silently zeroed
  double wall_secs = 0.0;
};

inline McResult mc_run(const McConfig& cfg, DegreePreset preset, Runtime& rt,
                       KernelTuning tuning = {}) {
  if (cfg.points <= 0 || cfg.walks_per_task <= 0 || cfg.step <= 0.0)
    throw std::invalid_argument("bad MC configuration");
  const double ratio = tuning.ratio_override.value_or(mc_preset_ratio(preset));
  McResult result;
  result.estimates.assign(static_cast<std::size_t>(cfg.points),
                          std::numeric_limits<double>::quiet_NaN());
  std::vector<double>* est = &result.estimates;
  const McConfig* c = &cfg;

  const RegionId domain_region = RegionId::token(1);
  auto point_region = [](int i) {
    return RegionId::token(0x300 + static_cast<std::uint64_t>(i));
  };

  const GroupId g = rt.init_group("mc", ratio);
  const std::uint64_t t0 = now_ns();
  for (int i = 0; i < cfg.points; ++i) {
    const double sig = tuning.significance_override.value_or(
        cycled_significance(static_cast<std::uint64_t>(i)));
    const RegionId inputs[] = {domain_region};
    const RegionId outputs[] = {point_region(i)};
    rt.spawn(
        g, Significance(sig),
        [c, est, i] {
          (*est)[static_cast<std::size_t>(i)] =
              detail::estimate_point_accurate(*c, i);
        },
        [c, est, i] {
          (*est)[static_cast<std::size_t>(i)] =
              detail::estimate_point_approx(*c, i);
        },
        inputs, outputs);
  }
  rt.wait_group(g);
  result.wall_secs = static_cast<double>(now_ns() - t0) * 1e-9;
  for (double v : result.estimates)
    if (std::isnan(v)) result.undefined_count += 1;
  return result;
}

}  // namespace sigtask
