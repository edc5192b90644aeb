#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigtask/significance.hpp"
#include "sigtask/task.hpp"

namespace sigtask {

inline constexpr std::size_t kDefaultGtbBuffer = 32;

// Selects one of the accuracy policies and its parameters.
struct PolicyConfig {
  enum class Kind { Agnostic, Gtb, Lqh, Perforation };

  Kind kind = Kind::Agnostic;
  // Tasks buffered per group before a GTB flush; nullopt buffers everything
  // until the next barrier (the max-buffer variant).
  std::optional<std::size_t> gtb_buffer = kDefaultGtbBuffer;
  // Optional LQH tie-break for single-level streams: a marginal-level task
  // runs accurately only while the worker is below its proportional quota.
  // Off by default; the plain history rule is used verbatim.
  bool lqh_proportional_tiebreak = false;

  static PolicyConfig agnostic() { return {Kind::Agnostic, {}, false}; }
  static PolicyConfig gtb(std::size_t buffer = kDefaultGtbBuffer) {
    if (buffer == 0) throw std::invalid_argument("GTB buffer must be positive");
    return {Kind::Gtb, buffer, false};
  }
  static PolicyConfig gtb_max_buffer() { return {Kind::Gtb, std::nullopt, false}; }
  static PolicyConfig lqh(bool proportional_tiebreak = false) {
    return {Kind::Lqh, {}, proportional_tiebreak};
  }
  static PolicyConfig perforation() { return {Kind::Perforation, {}, false}; }

  std::string name() const {
    switch (kind) {
      case Kind::Agnostic: return "agnostic";
      case Kind::Gtb:
        return gtb_buffer ? "gtb(" + std::to_string(*gtb_buffer) + ")"
                          : "gtb(max)";
      case Kind::Lqh: return "lqh";
      case Kind::Perforation: return "perforation";
    }
    return "?";
  }
};

// Number of accurate slots owed to n discretionary tasks at the given ratio.
// The ratio is a minimum, so fractional quotas round up. The small epsilon
// keeps products like 0.4 * 15 from creeping over the next integer.
inline std::size_t accurate_quota(std::size_t n, double ratio) {
  if (n == 0) return 0;
  const double want = ratio * static_cast<double>(n);
  auto q = static_cast<std::size_t>(std::ceil(want - 1e-9));
  return std::min(q, n);
}

struct GtbItem {
  TaskId id = 0;
  double significance = 0.0;
};

namespace detail {

// Shared contract of the buffered policy and the offline oracle: unconditional
// significance values are honored first, then the quota goes to the most
// significant of the remaining tasks, ties broken by earlier spawn id.
inline std::vector<ExecutionDecision> rank_by_significance(
    std::span<const GtbItem> items, double ratio) {
  std::vector<ExecutionDecision> out(items.size(),
                                     ExecutionDecision::Approximate);
  std::vector<std::size_t> open;
  open.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].significance == 1.0) {
      out[i] = ExecutionDecision::Accurate;
    } else if (items[i].significance != 0.0) {
      open.push_back(i);
    }
  }
  std::sort(open.begin(), open.end(), [&](std::size_t a, std::size_t b) {
    if (items[a].significance != items[b].significance)
      return items[a].significance > items[b].significance;
    return items[a].id < items[b].id;
  });
  const std::size_t quota = accurate_quota(open.size(), ratio);
  for (std::size_t r = 0; r < quota; ++r)
    out[open[r]] = ExecutionDecision::Accurate;
  return out;
}

}  // namespace detail

// Decisions for one flushed GTB window, positions matching the input order.
// Approximate here means "non-accurate"; the runtime downgrades it to Dropped
// for tasks without an approximate body.
inline std::vector<ExecutionDecision> gtb_assign(std::span<const GtbItem> items,
                                                 double ratio) {
  return detail::rank_by_significance(items, ratio);
}

// Offline assignment with complete information, used as the reference when
// scoring a finished run. Matches gtb_assign tie-breaking by construction so
// that a max-buffer GTB run reproduces it exactly.
inline std::vector<ExecutionDecision> oracle_assign(
    std::span<const GtbItem> items, double ratio) {
  std::vector<ExecutionDecision> out(items.size(),
                                     ExecutionDecision::Approximate);
  struct Entry {
    double significance;
    TaskId id;
    std::size_t pos;
  };
  std::vector<Entry> open;
  open.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].significance == 1.0)
      out[i] = ExecutionDecision::Accurate;
    else if (items[i].significance != 0.0)
      open.push_back({items[i].significance, items[i].id, i});
  }
  const std::size_t quota = accurate_quota(open.size(), ratio);
  std::partial_sort(open.begin(), open.begin() + static_cast<long>(quota),
                    open.end(), [](const Entry& a, const Entry& b) {
                      if (a.significance != b.significance)
                        return a.significance > b.significance;
                      return a.id < b.id;
                    });
  for (std::size_t r = 0; r < quota; ++r)
    out[open[r].pos] = ExecutionDecision::Accurate;
  return out;
}

// Significance-blind stride selection: task i is kept iff the integer part
// of i*R advances. Exactly floor(n*R) of n tasks survive. Non-accurate tasks
// are dropped outright; perforation never runs approximate bodies.
inline bool perforation_accurate(std::uint64_t index, double ratio) {
  const double lo = std::floor(static_cast<double>(index) * ratio);
  const double hi = std::floor(static_cast<double>(index + 1) * ratio);
  return lo < hi;
}

// Cumulative per-(worker, group) histogram over the 101 significance levels
// backing the local queue history policy. Strictly worker-local; no
// synchronization with other workers or the master.
class SignificanceHistogram {
 public:
  // History rule, evaluated before the current task is recorded: run
  // accurately iff the number of tasks seen at this level or below exceeds
  // (1 - ratio) times everything seen so far. Unconditional significance
  // values bypass the rule.
  ExecutionDecision decide(Significance s, double ratio,
                           bool proportional_tiebreak = false) const {
    if (s.forces_accurate()) return ExecutionDecision::Accurate;
    if (s.forces_approximate()) return ExecutionDecision::Approximate;
    const int level = DiscreteLevel(s).index();
    const double threshold =
        (1.0 - ratio) * static_cast<double>(total_);
    std::uint64_t below = 0;  // tasks at strictly lower levels
    for (int l = 0; l < level; ++l) below += counts_[l];
    const std::uint64_t cumulative = below + counts_[level];
    if (static_cast<double>(cumulative) <= threshold)
      return ExecutionDecision::Approximate;
    // The rule says accurate. When the task's own level is what tips the
    // comparison, the optional tie-break caps accurate picks at the
    // proportional quota; otherwise single-level streams all run accurately.
    if (proportional_tiebreak && static_cast<double>(below) <= threshold &&
        accurate_ >= accurate_quota(total_ + 1, ratio)) {
      return ExecutionDecision::Approximate;
    }
    return ExecutionDecision::Accurate;
  }

  // Statistics cover every executed task, whatever the decision was.
  void record(Significance s, ExecutionDecision d) {
    counts_[DiscreteLevel(s).index()] += 1;
    total_ += 1;
    if (d == ExecutionDecision::Accurate) accurate_ += 1;
  }

  std::uint64_t total() const { return total_; }
  std::uint64_t accurate() const { return accurate_; }
  std::uint64_t count_at(int level) const {
    return counts_.at(static_cast<std::size_t>(level));
  }
  std::uint64_t cumulative(int level) const {
    std::uint64_t c = 0;
    for (int l = 0; l <= level; ++l) c += counts_[l];
    return c;
  }

 private:
  std::array<std::uint64_t, DiscreteLevel::kCount> counts_{};
  std::uint64_t total_ = 0;
  std::uint64_t accurate_ = 0;
};

}  // namespace sigtask
