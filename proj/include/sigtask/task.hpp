#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <vector>

namespace sigtask {

// Opaque name for a piece of data a task reads or writes. Two tasks naming
// the same region conflict if at least one of them writes it.
struct RegionId {
  std::uint64_t value = 0;

  static RegionId token(std::uint64_t v) { return RegionId{v}; }
  static RegionId of(const void* p) {
    return RegionId{reinterpret_cast<std::uintptr_t>(p)};
  }

  friend bool operator==(RegionId a, RegionId b) { return a.value == b.value; }
};

using TaskId = std::uint64_t;

struct GroupId {
  std::uint32_t index = 0;
  friend bool operator==(GroupId a, GroupId b) { return a.index == b.index; }
};

enum class ExecutionDecision : std::uint8_t { Accurate, Approximate, Dropped };

inline const char* to_string(ExecutionDecision d) {
  switch (d) {
    case ExecutionDecision::Accurate: return "accurate";
    case ExecutionDecision::Approximate: return "approximate";
    case ExecutionDecision::Dropped: return "dropped";
  }
  return "?";
}

using TaskBody = std::function<void()>;

// One spawned task. The runtime owns these in a stable arena; workers only
// ever touch them through pointers handed over via the ready queues.
struct TaskDescriptor {
  TaskId id = 0;
  GroupId group;
  double significance = 1.0;
  TaskBody accurate;
  TaskBody approximate;  // empty: a non-accurate decision drops the task
  std::vector<RegionId> inputs;
  std::vector<RegionId> outputs;

  // Captured at spawn time; telemetry is accounted per (group, epoch).
  std::uint32_t epoch = 0;
  double requested_ratio = 1.0;

  // Scheduling state. `dependents`, `predecessors` and `issued` are guarded
  // by the runtime's graph mutex; `pending` is decremented by workers.
  std::atomic<int> pending{0};
  std::vector<TaskDescriptor*> dependents;
  std::vector<TaskId> predecessors;
  bool issued = false;
  bool defer_decision = false;  // LQH decides right before execution
  ExecutionDecision planned = ExecutionDecision::Accurate;
  std::atomic<bool> completed{false};
  int enqueued_worker = -1;  // round-robin target, -1 until enqueued

  bool has_approximate() const { return static_cast<bool>(approximate); }
};

}  // namespace sigtask
