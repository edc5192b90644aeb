#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "sigtask/policy.hpp"
#include "sigtask/scheduler.hpp"
#include "sigtask/significance.hpp"
#include "sigtask/task.hpp"
#include "sigtask/telemetry.hpp"

namespace sigtask {

// Master/worker task runtime. The master thread spawns tasks and waits on
// barriers; workers execute task bodies. Spawned tasks carry a significance
// value and optionally an approximate body; the configured policy decides
// which version runs (or whether the task is dropped).
//
// All public calls must come from the thread that constructed the runtime.
// Task bodies must not spawn or wait.
class Runtime {
 public:
  Runtime(unsigned workers, PolicyConfig policy)
      : policy_(policy), worker_count_(workers) {
    if (workers == 0)
      throw std::invalid_argument("runtime needs at least one worker");
    spin_limit_ = spin_limit_from_env();
    master_ = std::this_thread::get_id();
    for (unsigned w = 0; w < workers; ++w) queues_.emplace_back();
    worker_records_.resize(workers);
    lqh_.resize(workers);
    threads_.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      threads_.emplace_back([this, w] { worker_loop(w); });
  }

  ~Runtime() {
    if (!stopped_) {
      try {
        wait_all();
      } catch (...) {
      }
      stop_workers();
    }
  }

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  // Registers (or, at a barrier, re-registers with a new ratio) a named task
  // group. The ratio is the minimum fraction of the group's discretionary
  // tasks that must execute accurately.
  GroupId init_group(std::string_view name, double ratio) {
    require_master("init_group");
    require_alive();
    check_ratio(ratio);
    const std::string key(name);
    if (auto it = group_names_.find(key); it != group_names_.end()) {
      Group& g = *groups_[it->second];
      if (g.created.load() != g.completed.load())
        throw std::logic_error("group ratio can only change at a barrier");
      g.ratio = ratio;
      return GroupId{it->second};
    }
    const auto index = static_cast<std::uint32_t>(groups_.size());
    auto g = std::make_unique<Group>();
    g->name = key;
    g->ratio = ratio;
    {
      // Workers index groups_ under the graph mutex while completing tasks
      // of already-registered groups; growing the vector takes the same lock.
      std::lock_guard lk(graph_mx_);
      groups_.push_back(std::move(g));
    }
    group_names_.emplace(key, index);
    return GroupId{index};
  }

  TaskId spawn(GroupId gid, Significance sig, TaskBody accurate,
               TaskBody approximate, std::span<const RegionId> inputs,
               std::span<const RegionId> outputs) {
    require_master("spawn");
    require_alive();
    Group& g = group_ref(gid);
    if (!accurate) throw std::invalid_argument("task needs an accurate body");

    tasks_.emplace_back();
    TaskDescriptor& t = tasks_.back();
    t.id = next_id_++;
    t.group = gid;
    t.significance = sig.value();
    t.accurate = std::move(accurate);
    t.approximate = std::move(approximate);
    t.inputs.assign(inputs.begin(), inputs.end());
    t.outputs.assign(outputs.begin(), outputs.end());
    t.epoch = g.epoch;
    t.requested_ratio = g.ratio;
    g.created.fetch_add(1, std::memory_order_relaxed);
    g.created_in_epoch += 1;
    spawned_.fetch_add(1, std::memory_order_relaxed);

    {
      std::lock_guard lk(graph_mx_);
      deps_.link(t, pred_scratch_);
      for (TaskDescriptor* p : pred_scratch_) {
        p->dependents.push_back(&t);
        t.predecessors.push_back(p->id);
      }
      t.pending.store(static_cast<int>(pred_scratch_.size()),
                      std::memory_order_relaxed);
    }

    dispatch(t, g);
    return t.id;
  }

  TaskId spawn(GroupId gid, Significance sig, TaskBody accurate,
               TaskBody approximate = {},
               std::initializer_list<RegionId> inputs = {},
               std::initializer_list<RegionId> outputs = {}) {
    return spawn(gid, sig, std::move(accurate), std::move(approximate),
                 std::span<const RegionId>(inputs.begin(), inputs.size()),
                 std::span<const RegionId>(outputs.begin(), outputs.size()));
  }

  // Waits until every spawned task has completed or been dropped. Buffered
  // policy decisions are flushed first.
  void wait_all() {
    require_master("wait_all");
    flush_all_buffers();
    wait_for([this] {
      return completed_.load(std::memory_order_acquire) ==
             spawned_.load(std::memory_order_relaxed);
    });
    for (auto& g : groups_) advance_epoch(*g);
  }

  // Waits for one group only; other groups' tasks may still be in flight.
  // Supplying new_ratio replaces the group's ratio for subsequent spawns.
  void wait_group(GroupId gid, std::optional<double> new_ratio = std::nullopt) {
    require_master("wait_group");
    Group& g = group_ref(gid);
    flush_all_buffers();  // cross-group dependencies may gate this group
    wait_for([&g] {
      return g.completed.load(std::memory_order_acquire) ==
             g.created.load(std::memory_order_relaxed);
    });
    advance_epoch(g);
    if (new_ratio) {
      check_ratio(*new_ratio);
      g.ratio = *new_ratio;
    }
  }

  // Drains outstanding work and joins the workers. Further spawns fail.
  void shutdown() {
    require_master("shutdown");
    if (stopped_) return;
    wait_all();
    stop_workers();
  }

  unsigned worker_count() const { return worker_count_; }
  const PolicyConfig& policy() const { return policy_; }
  bool run_failed() const { return failed_.load(); }

  std::uint64_t spawned_count() const { return spawned_.load(); }
  std::uint64_t completed_count() const { return completed_.load(); }

  // Merged telemetry, sorted by task id. Only valid once everything spawned
  // has resolved (i.e. after a barrier).
  std::vector<ExecutionRecord> records() const {
    if (completed_.load() != spawned_.load())
      throw std::logic_error("records() requires a completed barrier");
    std::vector<ExecutionRecord> all;
    std::size_t n = master_records_.size();
    for (const auto& v : worker_records_) n += v.size();
    all.reserve(n);
    all.insert(all.end(), master_records_.begin(), master_records_.end());
    for (const auto& v : worker_records_) all.insert(all.end(), v.begin(), v.end());
    std::sort(all.begin(), all.end(),
              [](const ExecutionRecord& a, const ExecutionRecord& b) {
                return a.id < b.id;
              });
    return all;
  }

  struct GroupInfo {
    std::string name;
    double ratio = 1.0;
    std::uint64_t created = 0;
    std::uint64_t completed = 0;
    std::uint32_t epoch = 0;
  };

  GroupInfo group_info(GroupId gid) const {
    const Group& g = group_ref(gid);
    return {g.name, g.ratio, g.created.load(), g.completed.load(), g.epoch};
  }

  std::size_t group_count() const { return groups_.size(); }

  // Post-run introspection for audits; valid once quiesced.
  const TaskDescriptor& task(TaskId id) const {
    if (id >= tasks_.size()) throw std::out_of_range("unknown task id");
    return tasks_[id];
  }

 private:
  struct Group {
    std::string name;
    double ratio = 1.0;
    std::uint32_t epoch = 0;
    std::uint64_t created_in_epoch = 0;
    std::atomic<std::uint64_t> created{0};
    std::atomic<std::uint64_t> completed{0};
    std::vector<TaskDescriptor*> gtb_buffer;  // master only
    std::uint64_t perforation_index = 0;      // per epoch, discretionary only
  };

  static void check_ratio(double ratio) {
    if (!(ratio >= 0.0 && ratio <= 1.0))
      throw std::invalid_argument("ratio must lie in [0.0, 1.0]");
  }

  void require_master(const char* what) const {
    if (std::this_thread::get_id() != master_)
      throw std::logic_error(std::string(what) +
                             " must be called from the master thread");
  }

  void require_alive() const {
    if (stopped_) throw std::logic_error("runtime already shut down");
  }

  Group& group_ref(GroupId gid) {
    if (gid.index >= groups_.size())
      throw std::invalid_argument("unknown task group");
    return *groups_[gid.index];
  }
  const Group& group_ref(GroupId gid) const {
    if (gid.index >= groups_.size())
      throw std::invalid_argument("unknown task group");
    return *groups_[gid.index];
  }

  void advance_epoch(Group& g) {
    if (g.created_in_epoch == 0) return;
    g.epoch += 1;
    g.created_in_epoch = 0;
    g.perforation_index = 0;
  }

  void dispatch(TaskDescriptor& t, Group& g) {
    switch (policy_.kind) {
      case PolicyConfig::Kind::Agnostic:
        t.planned = ExecutionDecision::Accurate;
        issue(t);
        break;
      case PolicyConfig::Kind::Lqh:
        t.defer_decision = true;
        issue(t);
        break;
      case PolicyConfig::Kind::Perforation: {
        const Significance s(t.significance);
        if (s.forces_accurate())
          t.planned = ExecutionDecision::Accurate;
        else if (s.forces_approximate())
          t.planned = ExecutionDecision::Dropped;
        else
          t.planned = perforation_accurate(g.perforation_index++, g.ratio)
                          ? ExecutionDecision::Accurate
                          : ExecutionDecision::Dropped;
        issue(t);
        break;
      }
      case PolicyConfig::Kind::Gtb:
        g.gtb_buffer.push_back(&t);
        if (policy_.gtb_buffer && g.gtb_buffer.size() >= *policy_.gtb_buffer)
          flush_group_buffer(g);
        break;
    }
  }

  void flush_group_buffer(Group& g) {
    if (g.gtb_buffer.empty()) return;
    std::vector<GtbItem> items;
    items.reserve(g.gtb_buffer.size());
    for (const TaskDescriptor* t : g.gtb_buffer)
      items.push_back({t->id, t->significance});
    const auto decisions = gtb_assign(items, g.ratio);
    std::vector<TaskDescriptor*> window;
    window.swap(g.gtb_buffer);
    // Decisions come from the sorted view; tasks are issued in spawn order,
    // the whole window under one lock.
    ready_scratch_.clear();
    {
      std::lock_guard lk(graph_mx_);
      for (std::size_t i = 0; i < window.size(); ++i) {
        TaskDescriptor& t = *window[i];
        ExecutionDecision d = decisions[i];
        if (d == ExecutionDecision::Approximate && !t.has_approximate())
          d = ExecutionDecision::Dropped;
        t.planned = d;
        t.issued = true;
        if (t.pending.load(std::memory_order_relaxed) == 0) {
          if (d == ExecutionDecision::Dropped)
            settle_drop_chain(t, master_records_, -1, ready_scratch_);
          else
            ready_scratch_.push_back(&t);
        }
      }
    }
    enqueue_ready(ready_scratch_);
    notify_barrier();
  }

  void flush_all_buffers() {
    if (policy_.kind != PolicyConfig::Kind::Gtb) return;
    for (auto& g : groups_) flush_group_buffer(*g);
  }

  void issue(TaskDescriptor& t) {
    ready_scratch_.clear();
    {
      std::lock_guard lk(graph_mx_);
      t.issued = true;
      if (t.pending.load(std::memory_order_relaxed) == 0) {
        if (t.planned == ExecutionDecision::Dropped)
          settle_drop_chain(t, master_records_, -1, ready_scratch_);
        else
          ready_scratch_.push_back(&t);
      }
    }
    enqueue_ready(ready_scratch_);
    notify_barrier();
  }

  // Completion bookkeeping shared by executed and dropped tasks. Dropped
  // tasks complete with no body, but only once their dependencies resolved,
  // so transitive ordering through dropped writers still holds. Requires the
  // graph mutex.
  void settle_completed(TaskDescriptor& t,
                        std::vector<TaskDescriptor*>& ready,
                        std::vector<TaskDescriptor*>& dropped) {
    t.completed.store(true, std::memory_order_relaxed);
    group_ref(t.group).completed.fetch_add(1, std::memory_order_relaxed);
    completed_.fetch_add(1, std::memory_order_release);
    for (TaskDescriptor* d : t.dependents) {
      if (d->pending.fetch_sub(1, std::memory_order_acq_rel) == 1 &&
          d->issued) {
        if (d->planned == ExecutionDecision::Dropped)
          dropped.push_back(d);
        else
          ready.push_back(d);
      }
    }
  }

  void settle_drop_chain(TaskDescriptor& first,
                         std::vector<ExecutionRecord>& sink, int worker,
                         std::vector<TaskDescriptor*>& ready) {
    std::vector<TaskDescriptor*> dropped{&first};
    while (!dropped.empty()) {
      TaskDescriptor* d = dropped.back();
      dropped.pop_back();
      const std::uint64_t ts = now_ns();
      sink.push_back({d->id, d->group, d->epoch, d->significance,
                      d->requested_ratio, ExecutionDecision::Dropped, worker,
                      ts, ts});
      settle_completed(*d, ready, dropped);
    }
  }

  void complete_task(TaskDescriptor& t, int worker,
                     std::vector<ExecutionRecord>& sink,
                     std::vector<TaskDescriptor*>& ready) {
    ready.clear();
    {
      std::lock_guard lk(graph_mx_);
      std::vector<TaskDescriptor*> dropped;
      settle_completed(t, ready, dropped);
      while (!dropped.empty()) {
        TaskDescriptor* d = dropped.back();
        dropped.pop_back();
        const std::uint64_t ts = now_ns();
        sink.push_back({d->id, d->group, d->epoch, d->significance,
                        d->requested_ratio, ExecutionDecision::Dropped, worker,
                        ts, ts});
        settle_completed(*d, ready, dropped);
      }
    }
    enqueue_ready(ready);
    notify_barrier();
  }

  void enqueue_ready(const std::vector<TaskDescriptor*>& ready) {
    if (ready.empty()) return;
    for (TaskDescriptor* t : ready) {
      const unsigned w =
          rr_next_.fetch_add(1, std::memory_order_relaxed) % worker_count_;
      t->enqueued_worker = static_cast<int>(w);
      queues_[w].push(t);
    }
    work_epoch_.fetch_add(1, std::memory_order_release);
    if (parked_.load(std::memory_order_acquire) > 0) {
      { std::lock_guard lk(park_mx_); }  // fence against check-then-sleep
      park_cv_.notify_all();
    }
  }

  void notify_barrier() {
    if (barrier_waiting_.load(std::memory_order_acquire)) {
      std::lock_guard lk(barrier_mx_);
      barrier_cv_.notify_all();
    }
  }

  template <class Pred>
  void wait_for(Pred done) {
    if (done()) return;
    std::unique_lock lk(barrier_mx_);
    barrier_waiting_.store(true, std::memory_order_release);
    barrier_cv_.wait(lk, done);
    barrier_waiting_.store(false, std::memory_order_release);
  }

  void stop_workers() {
    {
      std::lock_guard lk(park_mx_);
      stop_ = true;
    }
    park_cv_.notify_all();
    for (auto& th : threads_)
      if (th.joinable()) th.join();
    stopped_ = true;
  }

  TaskDescriptor* find_work(unsigned w, std::minstd_rand& rng) {
    if (TaskDescriptor* t = queues_[w].pop_oldest()) return t;
    if (worker_count_ == 1) return nullptr;
    const unsigned start = rng() % worker_count_;
    for (unsigned k = 0; k < worker_count_; ++k) {
      const unsigned victim = (start + k) % worker_count_;
      if (victim == w) continue;
      if (TaskDescriptor* t = queues_[victim].steal_oldest()) return t;
    }
    return nullptr;
  }

  void worker_loop(unsigned w) {
    std::minstd_rand rng(w * 2654435761u + 12345u);
    std::vector<TaskDescriptor*> ready;
    unsigned idle = 0;
    for (;;) {
      TaskDescriptor* t = find_work(w, rng);
      if (t) {
        idle = 0;
        run_task(w, *t, ready);
        continue;
      }
      if (stop_.load(std::memory_order_acquire)) return;
      if (++idle < spin_limit_) {
        std::this_thread::yield();
        continue;
      }
      const std::uint64_t seen = work_epoch_.load(std::memory_order_acquire);
      t = find_work(w, rng);  // last look before parking
      if (t) {
        idle = 0;
        run_task(w, *t, ready);
        continue;
      }
      std::unique_lock lk(park_mx_);
      parked_.fetch_add(1, std::memory_order_release);
      park_cv_.wait(lk, [this, seen] {
        return stop_ ||
               work_epoch_.load(std::memory_order_acquire) != seen;
      });
      parked_.fetch_sub(1, std::memory_order_release);
      idle = 0;
    }
  }

  void run_task(unsigned w, TaskDescriptor& t,
                std::vector<TaskDescriptor*>& ready) {
    ExecutionDecision d = t.planned;
    if (t.defer_decision) {
      SignificanceHistogram& h = lqh_[w][t.group.index];
      const Significance s(t.significance);
      d = h.decide(s, t.requested_ratio, policy_.lqh_proportional_tiebreak);
      h.record(s, d);
    }
    if (d == ExecutionDecision::Approximate && !t.has_approximate())
      d = ExecutionDecision::Dropped;
    const std::uint64_t start = now_ns();
    if (d != ExecutionDecision::Dropped) {
      try {
        if (d == ExecutionDecision::Accurate)
          t.accurate();
        else
          t.approximate();
      } catch (...) {
        failed_.store(true, std::memory_order_relaxed);
      }
    }
    const std::uint64_t end = now_ns();
    worker_records_[w].push_back({t.id, t.group, t.epoch, t.significance,
                                  t.requested_ratio, d, static_cast<int>(w),
                                  start, end});
    complete_task(t, static_cast<int>(w), worker_records_[w], ready);
  }

  PolicyConfig policy_;
  unsigned worker_count_;
  unsigned spin_limit_ = 64;
  std::thread::id master_;

  std::deque<TaskDescriptor> tasks_;  // stable addresses
  TaskId next_id_ = 0;
  std::vector<std::unique_ptr<Group>> groups_;
  std::unordered_map<std::string, std::uint32_t> group_names_;

  std::mutex graph_mx_;
  DependencyTracker deps_;
  std::vector<TaskDescriptor*> pred_scratch_;
  std::vector<TaskDescriptor*> ready_scratch_;

  std::deque<WorkerQueue> queues_;
  std::vector<std::thread> threads_;
  std::atomic<unsigned> rr_next_{0};

  std::atomic<std::uint64_t> spawned_{0};
  std::atomic<std::uint64_t> completed_{0};
  std::atomic<bool> failed_{false};
  bool stopped_ = false;

  std::mutex park_mx_;
  std::condition_variable park_cv_;
  std::atomic<std::uint64_t> work_epoch_{0};
  std::atomic<int> parked_{0};
  std::atomic<bool> stop_{false};

  std::mutex barrier_mx_;
  std::condition_variable barrier_cv_;
  std::atomic<bool> barrier_waiting_{false};

  std::vector<std::vector<ExecutionRecord>> worker_records_;
  std::vector<ExecutionRecord> master_records_;
  std::vector<std::unordered_map<std::uint32_t, SignificanceHistogram>> lqh_;
};

}  // namespace sigtask
