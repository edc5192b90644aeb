#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sigtask/image.hpp"
#include "sigtask/telemetry.hpp"

namespace sigtask {

// Peak signal-to-noise ratio in dB against an 8-bit reference. Identical
// images return +infinity.
inline double psnr(const ImageBuffer& reference, const ImageBuffer& candidate) {
  if (!reference.same_shape(candidate))
    throw std::invalid_argument("psnr: image dimensions differ");
  double sse = 0.0;
  for (std::size_t i = 0; i < reference.pixels.size(); ++i) {
    const double d = static_cast<double>(reference.pixels[i]) -
                     static_cast<double>(candidate.pixels[i]);
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(reference.pixels.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

// 100 * ||candidate - reference||_2 / ||reference||_2.
inline double relative_error_pct(std::span<const double> reference,
                                 std::span<const double> candidate) {
  if (reference.size() != candidate.size())
    throw std::invalid_argument("relative_error: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = candidate[i] - reference[i];
    num += d * d;
    den += reference[i] * reference[i];
  }
  if (den == 0.0)
    throw std::invalid_argument("relative_error: reference norm is zero");
  return 100.0 * std::sqrt(num / den);
}

// Mean absolute deviation between requested and achieved accurate ratios,
// one entry per accounting unit (task group, or group-epoch for runs whose
// ratio changes at barriers).
inline double ratio_diff(std::span<const double> requested,
                         std::span<const double> provided) {
  if (requested.size() != provided.size())
    throw std::invalid_argument("ratio_diff: length mismatch");
  if (requested.empty())
    throw std::invalid_argument("ratio_diff: no groups");
  double acc = 0.0;
  for (std::size_t i = 0; i < requested.size(); ++i)
    acc += std::abs(requested[i] - provided[i]);
  return acc / static_cast<double>(requested.size());
}

// Policy-fidelity accounting. A unit is one (group, epoch) pair: the ratio
// contract is scoped to the tasks between two barriers, and a barrier may
// change the ratio. Unconditional tasks (significance exactly 0 or 1) are
// programmer directives, not runtime discretion, so they are excluded from
// the provided-ratio accounting; discretionary tasks are the denominator.
struct FidelityUnit {
  std::uint32_t group = 0;
  std::uint32_t epoch = 0;
  double requested = 1.0;
  std::uint64_t total = 0;
  std::uint64_t accurate = 0;
  std::uint64_t approximate = 0;
  std::uint64_t dropped = 0;
  std::uint64_t discretionary = 0;
  std::uint64_t discretionary_accurate = 0;
  std::uint64_t inverted = 0;

  bool has_discretion() const { return discretionary > 0; }
  double provided() const {
    return has_discretion() ? static_cast<double>(discretionary_accurate) /
                                  static_cast<double>(discretionary)
                            : requested;
  }
  double accurate_fraction() const {
    return total ? static_cast<double>(accurate) / static_cast<double>(total)
                 : 1.0;
  }
};

inline std::vector<FidelityUnit> fidelity_units(
    std::span<const ExecutionRecord> records) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, FidelityUnit> units;
  for (const auto& r : records) {
    auto& u = units[{r.group.index, r.epoch}];
    u.group = r.group.index;
    u.epoch = r.epoch;
    u.requested = r.requested_ratio;
    u.total += 1;
    switch (r.decision) {
      case ExecutionDecision::Accurate: u.accurate += 1; break;
      case ExecutionDecision::Approximate: u.approximate += 1; break;
      case ExecutionDecision::Dropped: u.dropped += 1; break;
    }
    if (r.significance != 0.0 && r.significance != 1.0) {
      u.discretionary += 1;
      if (r.is_accurate()) u.discretionary_accurate += 1;
    }
  }
  // Inversions: tasks that hold (or miss) an accurate slot a strictly
  // different significance should have had. Within each unit the achieved
  // accurate budget is replayed onto the most significant tasks — tasks of
  // equal significance being interchangeable — and every misplaced task on
  // either side counts. Uniform-significance groups therefore never invert,
  // and a crossed pair counts both its members.
  std::map<std::pair<std::uint32_t, std::uint32_t>,
           std::map<double, std::pair<std::uint64_t, std::uint64_t>>>
      level_counts;  // unit -> significance -> (tasks, accurate tasks)
  for (const auto& r : records) {
    auto& lv = level_counts[{r.group.index, r.epoch}][r.significance];
    lv.first += 1;
    if (r.is_accurate()) lv.second += 1;
  }
  for (auto& [key, levels] : level_counts) {
    std::uint64_t budget = 0;
    for (const auto& [sig, lv] : levels) budget += lv.second;
    std::uint64_t inverted = 0;
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
      const std::uint64_t ideal = std::min(it->second.first, budget);
      budget -= ideal;
      const std::uint64_t got = it->second.second;
      inverted += got > ideal ? got - ideal : ideal - got;
    }
    units[key].inverted = inverted;
  }
  std::vector<FidelityUnit> out;
  out.reserve(units.size());
  for (auto& [k, u] : units) out.push_back(u);
  return out;
}

// Percentage of inverted-significance tasks per group (tasks pooled over the
// group's epochs), averaged over groups.
inline double inversion_percent(std::span<const ExecutionRecord> records) {
  const auto units = fidelity_units(records);
  std::map<std::uint32_t, std::pair<std::uint64_t, std::uint64_t>> per_group;
  for (const auto& u : units) {
    auto& g = per_group[u.group];
    g.first += u.inverted;
    g.second += u.total;
  }
  if (per_group.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& [gid, counts] : per_group)
    acc += counts.second
               ? 100.0 * static_cast<double>(counts.first) /
                     static_cast<double>(counts.second)
               : 0.0;
  return acc / static_cast<double>(per_group.size());
}

// ratio_diff over the run's accounting units. Units with no discretionary
// tasks contribute zero (the runtime had no decision to make).
inline double ratio_diff(std::span<const ExecutionRecord> records) {
  const auto units = fidelity_units(records);
  if (units.empty()) return 0.0;
  std::vector<double> requested, provided;
  for (const auto& u : units) {
    requested.push_back(u.requested);
    provided.push_back(u.provided());
  }
  return ratio_diff(requested, provided);
}

// Achieved accurate fraction over discretionary tasks, or nullopt when the
// run had none.
inline std::optional<double> provided_ratio(
    std::span<const ExecutionRecord> records) {
  std::uint64_t disc = 0, acc = 0;
  for (const auto& r : records) {
    if (r.significance == 0.0 || r.significance == 1.0) continue;
    ++disc;
    if (r.is_accurate()) ++acc;
  }
  if (disc == 0) return std::nullopt;
  return static_cast<double>(acc) / static_cast<double>(disc);
}

inline double overhead_ratio(double policy_secs, double agnostic_secs) {
  if (agnostic_secs <= 0.0)
    throw std::invalid_argument("overhead_ratio: bad baseline time");
  return policy_secs / agnostic_secs;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace sigtask
