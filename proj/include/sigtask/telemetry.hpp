#pragma once

#include <chrono>
#include <cstdint>
#include <span>

#include "sigtask/task.hpp"

namespace sigtask {

inline std::uint64_t now_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

// Per-task telemetry appended by the executing worker (or by the master for
// tasks dropped at issue time, worker == -1).
struct ExecutionRecord {
  TaskId id = 0;
  GroupId group;
  std::uint32_t epoch = 0;
  double significance = 0.0;
  double requested_ratio = 1.0;
  ExecutionDecision decision = ExecutionDecision::Accurate;
  int worker = -1;
  std::uint64_t start_ns = 0;
  std::uint64_t end_ns = 0;

  bool is_accurate() const { return decision == ExecutionDecision::Accurate; }
};

struct DecisionCounts {
  std::uint64_t accurate = 0;
  std::uint64_t approximate = 0;
  std::uint64_t dropped = 0;

  std::uint64_t total() const { return accurate + approximate + dropped; }
};

inline DecisionCounts count_decisions(std::span<const ExecutionRecord> records) {
  DecisionCounts c;
  for (const auto& r : records) {
    switch (r.decision) {
      case ExecutionDecision::Accurate: ++c.accurate; break;
      case ExecutionDecision::Approximate: ++c.approximate; break;
      case ExecutionDecision::Dropped: ++c.dropped; break;
    }
  }
  return c;
}

}  // namespace sigtask
