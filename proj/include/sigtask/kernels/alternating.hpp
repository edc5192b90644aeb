#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sigtask/kernels/common.hpp"
#include "sigtask/quality.hpp"
#include "sigtask/runtime.hpp"

namespace sigtask {

// Synthetic timestep workload that alternates the group ratio between 1.0
// and a caller-chosen value at consecutive barriers: odd steps run fully
// accurate, even steps at the given ratio.
struct AlternatingTrace {
  std::vector<double> step_accurate_fraction;  // one entry per step
  double wall_secs = 0.0;
};

inline AlternatingTrace alternating_ratio_demo(int steps, double ratio,
                                               Runtime& rt,
                                               int tasks_per_step = 64) {
  if (steps < 2) throw std::invalid_argument("need at least two steps");
  std::vector<double> cells(
      static_cast<std::size_t>(tasks_per_step), 0.0);
  std::vector<double>* out = &cells;

  const GroupId g = rt.init_group("step", 1.0);
  const std::uint64_t t0 = now_ns();
  for (int step = 1; step <= steps; ++step) {
    for (int i = 0; i < tasks_per_step; ++i) {
      const RegionId outputs[] = {
          RegionId::token(0x700 + static_cast<std::uint64_t>(i))};
      rt.spawn(
          g,
          Significance(cycled_significance(static_cast<std::uint64_t>(i))),
          [out, i, step] {
            (*out)[static_cast<std::size_t>(i)] += 1.0 * step;
          },
          [out, i, step] {
            (*out)[static_cast<std::size_t>(i)] += 0.5 * step;
          },
          std::span<const RegionId>{}, std::span<const RegionId>(outputs));
    }
    // Next step flips between fully accurate and the requested ratio.
    const double next_ratio = (step % 2 == 1) ? ratio : 1.0;
    rt.wait_group(g, next_ratio);
  }
  AlternatingTrace trace;
  trace.wall_secs = static_cast<double>(now_ns() - t0) * 1e-9;

  const auto units = fidelity_units(rt.records());
  trace.step_accurate_fraction.assign(static_cast<std::size_t>(steps), 0.0);
  for (const auto& u : units) {
    if (u.epoch < trace.step_accurate_fraction.size())
      trace.step_accurate_fraction[u.epoch] = u.accurate_fraction();
  }
  return trace;
}

}  // namespace sigtask
