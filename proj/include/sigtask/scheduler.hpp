#pragma once

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "sigtask/task.hpp"

namespace sigtask {

// FIFO ready queue owned by one worker. The owner and thieves both take the
// oldest task; removal is atomic under the queue mutex, so a task can never
// be obtained twice.
class WorkerQueue {
 public:
  void push(TaskDescriptor* t) {
    std::lock_guard lk(mx_);
    q_.push_back(t);
  }

  TaskDescriptor* pop_oldest() {
    std::lock_guard lk(mx_);
    if (q_.empty()) return nullptr;
    TaskDescriptor* t = q_.front();
    q_.pop_front();
    return t;
  }

  // Steals keep the owner's FIFO order: one task, oldest first.
  TaskDescriptor* steal_oldest() { return pop_oldest(); }

  std::size_t size() const {
    std::lock_guard lk(mx_);
    return q_.size();
  }

 private:
  mutable std::mutex mx_;
  std::deque<TaskDescriptor*> q_;
};

// Last-writer serialization over named regions: a new task depends on the
// most recent writer of anything it touches, and on all readers since that
// write for anything it writes. Edges always point from earlier to later
// spawn ids, so the graph cannot contain cycles.
//
// Only the master builds entries; callers hold the runtime graph mutex, under
// which completion flags are stable.
class DependencyTracker {
 public:
  void link(TaskDescriptor& t, std::vector<TaskDescriptor*>& preds) {
    preds.clear();
    for (RegionId r : t.inputs) {
      if (auto it = regions_.find(r.value); it != regions_.end())
        add(it->second.last_writer, t, preds);
    }
    for (RegionId r : t.outputs) {
      if (auto it = regions_.find(r.value); it != regions_.end()) {
        add(it->second.last_writer, t, preds);
        for (TaskDescriptor* reader : it->second.readers_since_write)
          add(reader, t, preds);
      }
    }
    std::sort(preds.begin(), preds.end(),
              [](const TaskDescriptor* a, const TaskDescriptor* b) {
                return a->id < b->id;
              });
    preds.erase(std::unique(preds.begin(), preds.end()), preds.end());

    for (RegionId r : t.outputs) {
      RegionState& s = regions_[r.value];
      s.last_writer = &t;
      s.readers_since_write.clear();
    }
    for (RegionId r : t.inputs) {
      if (writes(t, r)) continue;
      regions_[r.value].readers_since_write.push_back(&t);
    }
  }

  void clear() { regions_.clear(); }

 private:
  struct RegionState {
    TaskDescriptor* last_writer = nullptr;
    std::vector<TaskDescriptor*> readers_since_write;
  };

  static bool writes(const TaskDescriptor& t, RegionId r) {
    return std::find(t.outputs.begin(), t.outputs.end(), r) != t.outputs.end();
  }

  static void add(TaskDescriptor* p, const TaskDescriptor& t,
                  std::vector<TaskDescriptor*>& preds) {
    if (p && p != &t && !p->completed.load(std::memory_order_relaxed))
      preds.push_back(p);
  }

  std::unordered_map<std::uint64_t, RegionState> regions_;
};

// Spin rounds before an idle worker parks; overridable via SIGTASK_SPIN.
inline unsigned spin_limit_from_env() {
  if (const char* s = std::getenv("SIGTASK_SPIN")) {
    const long v = std::strtol(s, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 64;
}

}  // namespace sigtask
