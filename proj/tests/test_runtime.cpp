#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <map>
#include <random>
#include <thread>
#include <vector>

#include "sigtask/policy.hpp"
#include "sigtask/quality.hpp"
#include "sigtask/runtime.hpp"

using namespace sigtask;

namespace {

std::vector<std::pair<TaskId, ExecutionDecision>> decision_log(
    const std::vector<ExecutionRecord>& rec) {
  std::vector<std::pair<TaskId, ExecutionDecision>> out;
  for (const auto& r : rec) out.emplace_back(r.id, r.decision);
  return out;
}

}  // namespace

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(Runtime(0, PolicyConfig::agnostic()), std::invalid_argument);
  Runtime rt(1, PolicyConfig::lqh());
  CHECK_THROWS_AS(rt.init_group("g", -0.01), std::invalid_argument);
  CHECK_THROWS_AS(rt.init_group("g", 1.01), std::invalid_argument);
  CHECK_THROWS_AS(rt.spawn(GroupId{42}, Significance(0.5), [] {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(rt.wait_group(GroupId{42}), std::invalid_argument);
  const GroupId g = rt.init_group("g", 0.5);
  CHECK_THROWS_AS(rt.spawn(g, Significance(0.5), TaskBody{}),
                  std::invalid_argument);
}

TEST_CASE("spawning after shutdown is an error") {
  Runtime rt(2, PolicyConfig::agnostic());
  const GroupId g = rt.init_group("g", 1.0);
  rt.spawn(g, Significance(0.5), [] {});
  rt.shutdown();
  CHECK_THROWS_AS(rt.spawn(g, Significance(0.5), [] {}), std::logic_error);
  CHECK_THROWS_AS(rt.init_group("h", 1.0), std::logic_error);
}

TEST_CASE("sixteen workers execute a batch") {
  Runtime rt(16, PolicyConfig::gtb_max_buffer());
  CHECK(rt.worker_count() == 16);
  const GroupId g = rt.init_group("g", 0.5);
  std::atomic<int> ran{0};
  for (int i = 0; i < 100; ++i)
    rt.spawn(
        g, Significance(0.1 * (1 + i % 9)), [&ran] { ++ran; },
        [&ran] { ++ran; });
  rt.wait_all();
  CHECK(ran.load() == 100);
  CHECK(rt.records().size() == 100);
}

TEST_CASE("empty barriers return immediately") {
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  rt.wait_all();
  const GroupId g = rt.init_group("g", 0.5);
  rt.wait_group(g);
  rt.wait_all();
  CHECK(rt.records().empty());
}

TEST_CASE("wait_all resolves every task across groups") {
  Runtime rt(4, PolicyConfig::gtb(8));
  const GroupId a = rt.init_group("a", 0.4);
  const GroupId b = rt.init_group("b", 0.9);
  for (int i = 0; i < 50; ++i) {
    rt.spawn(a, Significance(0.1 * (1 + i % 9)), [] {}, [] {});
    rt.spawn(b, Significance(0.1 * (1 + (i + 3) % 9)), [] {}, [] {});
  }
  rt.wait_all();
  CHECK(rt.records().size() == 100);
  CHECK(rt.group_info(a).completed == 50);
  CHECK(rt.group_info(b).completed == 50);
}

TEST_CASE("max-buffer GTB decides over the whole group at the barrier") {
  // With five buffered tasks and ratio 0.4 the quota is two, and they must
  // be the two most significant ones; a smaller window would pick otherwise.
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  const GroupId g = rt.init_group("g", 0.4);
  const double sigs[] = {0.2, 0.9, 0.3, 0.8, 0.4};
  for (double s : sigs) rt.spawn(g, Significance(s), [] {}, [] {});
  rt.wait_all();
  const auto rec = rt.records();
  std::map<TaskId, ExecutionDecision> d;
  for (const auto& r : rec) d[r.id] = r.decision;
  CHECK(d[1] == ExecutionDecision::Accurate);  // 0.9
  CHECK(d[3] == ExecutionDecision::Accurate);  // 0.8
  CHECK(d[0] == ExecutionDecision::Approximate);
  CHECK(d[2] == ExecutionDecision::Approximate);
  CHECK(d[4] == ExecutionDecision::Approximate);
}

TEST_CASE("bounded GTB flushes every full window") {
  Runtime rt(2, PolicyConfig::gtb(2));
  const GroupId g = rt.init_group("g", 0.5);
  const double sigs[] = {0.2, 0.9, 0.8, 0.3};
  for (double s : sigs) rt.spawn(g, Significance(s), [] {}, [] {});
  rt.wait_all();
  const auto rec = rt.records();
  std::map<TaskId, ExecutionDecision> d;
  for (const auto& r : rec) d[r.id] = r.decision;
  // windows are {0.2, 0.9} and {0.8, 0.3}: one accurate pick each
  CHECK(d[1] == ExecutionDecision::Accurate);
  CHECK(d[2] == ExecutionDecision::Accurate);
  CHECK(d[0] == ExecutionDecision::Approximate);
  CHECK(d[3] == ExecutionDecision::Approximate);
}

TEST_CASE("agnostic executes everything accurately, even significance zero") {
  Runtime rt(2, PolicyConfig::agnostic());
  const GroupId g = rt.init_group("g", 0.0);
  for (int i = 0; i < 20; ++i)
    rt.spawn(g, Significance(i % 3 == 0 ? 0.0 : 0.5), [] {}, [] {});
  rt.wait_all();
  for (const auto& r : rt.records())
    CHECK(r.decision == ExecutionDecision::Accurate);
}

TEST_CASE("unconditional significance under every policy") {
  const PolicyConfig policies[] = {PolicyConfig::gtb(4),
                                   PolicyConfig::gtb_max_buffer(),
                                   PolicyConfig::lqh(),
                                   PolicyConfig::perforation()};
  for (const auto& policy : policies) {
    CAPTURE(policy.name());
    Runtime rt(2, policy);
    const GroupId g = rt.init_group("g", 0.5);
    for (int i = 0; i < 30; ++i) {
      const double s = i % 3 == 0 ? 1.0 : (i % 3 == 1 ? 0.0 : 0.5);
      rt.spawn(g, Significance(s), [] {}, [] {});
    }
    // a 0.0 task without an approximate body must be dropped, never run
    rt.spawn(g, Significance(0.0), [] { throw std::runtime_error("ran"); });
    rt.wait_all();
    for (const auto& r : rt.records()) {
      if (r.significance == 1.0)
        CHECK(r.decision == ExecutionDecision::Accurate);
      if (r.significance == 0.0) {
        CHECK(r.decision != ExecutionDecision::Accurate);
        if (policy.kind == PolicyConfig::Kind::Perforation)
          CHECK(r.decision == ExecutionDecision::Dropped);
      }
    }
    CHECK_FALSE(rt.run_failed());
  }
}

TEST_CASE("a throwing body marks the run failed but the barrier returns") {
  Runtime rt(2, PolicyConfig::agnostic());
  const GroupId g = rt.init_group("g", 1.0);
  std::atomic<int> ran{0};
  for (int i = 0; i < 10; ++i)
    rt.spawn(g, Significance(0.5), [&ran, i] {
      if (i == 3) throw std::runtime_error("boom");
      ++ran;
    });
  rt.wait_all();
  CHECK(rt.run_failed());
  CHECK(ran.load() == 9);
  CHECK(rt.records().size() == 10);
}

TEST_CASE("task bodies may not spawn or wait") {
  Runtime rt(2, PolicyConfig::agnostic());
  const GroupId g = rt.init_group("g", 1.0);
  rt.spawn(g, Significance(0.5), [&rt, g] {
    rt.spawn(g, Significance(0.5), [] {});  // throws inside the body
  });
  rt.wait_all();
  CHECK(rt.run_failed());
}

TEST_CASE("records require a quiesced runtime") {
  Runtime rt(2, PolicyConfig::agnostic());
  const GroupId g = rt.init_group("g", 1.0);
  std::atomic<bool> release{false};
  rt.spawn(g, Significance(0.5), [&release] {
    while (!release.load()) std::this_thread::yield();
  });
  CHECK_THROWS_AS(rt.records(), std::logic_error);
  release.store(true);
  rt.wait_all();
  CHECK(rt.records().size() == 1);
}

TEST_CASE("re-initializing a group updates its ratio at a barrier") {
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  const GroupId g = rt.init_group("g", 0.2);
  rt.spawn(g, Significance(0.5), [] {}, [] {});
  // buffered but unissued tasks count as in flight
  CHECK_THROWS_AS(rt.init_group("g", 0.9), std::logic_error);
  rt.wait_group(g);
  const GroupId g2 = rt.init_group("g", 0.9);
  CHECK(g2 == g);
  CHECK(rt.group_info(g).ratio == doctest::Approx(0.9));
}

TEST_CASE("wait_group can swap the ratio for subsequent epochs") {
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  const GroupId g = rt.init_group("g", 1.0);
  for (int step = 0; step < 3; ++step) {
    for (int i = 0; i < 10; ++i)
      rt.spawn(g, Significance(0.1 * (1 + i % 9)), [] {}, [] {});
    rt.wait_group(g, step == 0 ? 0.5 : 1.0);
  }
  const auto units = fidelity_units(rt.records());
  REQUIRE(units.size() == 3);
  CHECK(units[0].requested == doctest::Approx(1.0));
  CHECK(units[1].requested == doctest::Approx(0.5));
  CHECK(units[2].requested == doctest::Approx(1.0));
  CHECK(units[0].accurate == 10);
  CHECK(units[1].accurate == 5);
  CHECK(units[2].accurate == 10);
}

TEST_CASE("single worker with max-buffer GTB replays identically") {
  auto run = [] {
    Runtime rt(1, PolicyConfig::gtb_max_buffer());
    const GroupId g = rt.init_group("g", 0.35);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> sig(0.0, 1.0);
    for (int i = 0; i < 400; ++i) {
      const bool approx_body = i % 3 != 0;
      rt.spawn(g, Significance(sig(rng)), [] {},
               approx_body ? TaskBody([] {}) : TaskBody{});
    }
    rt.wait_all();
    return decision_log(rt.records());
  };
  CHECK(run() == run());
}

TEST_CASE("single-worker LQH matches the histogram rule sequentially") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> level(0, 100);
  std::vector<double> stream;
  for (int i = 0; i < 600; ++i) stream.push_back(level(rng) / 100.0);

  Runtime rt(1, PolicyConfig::lqh());
  const GroupId g = rt.init_group("g", 0.35);
  for (double s : stream) rt.spawn(g, Significance(s), [] {}, [] {});
  rt.wait_all();
  const auto rec = rt.records();

  SignificanceHistogram h;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto expect = h.decide(Significance(stream[i]), 0.35);
    h.record(Significance(stream[i]), expect);
    CHECK(rec[i].decision == expect);
  }
}

TEST_CASE("perforation ignores significance") {
  auto run = [](const std::vector<double>& sigs) {
    Runtime rt(2, PolicyConfig::perforation());
    const GroupId g = rt.init_group("g", 0.6);
    for (double s : sigs) rt.spawn(g, Significance(s), [] {}, [] {});
    rt.wait_all();
    std::vector<ExecutionDecision> out;
    for (const auto& r : rt.records()) out.push_back(r.decision);
    return out;
  };
  std::vector<double> sigs{0.2, 0.8, 0.5, 0.9, 0.1, 0.7, 0.3, 0.6};
  auto shuffled = sigs;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(run(sigs) == run(shuffled));
}

TEST_CASE("max-buffer GTB reproduces the offline oracle") {
  Runtime rt(4, PolicyConfig::gtb_max_buffer());
  const GroupId g = rt.init_group("g", 0.45);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> sig(0.0, 1.0);
  std::vector<GtbItem> items;
  for (int i = 0; i < 500; ++i) {
    const double s = sig(rng);
    items.push_back({static_cast<TaskId>(i), s});
    rt.spawn(g, Significance(s), [] {}, [] {});
  }
  rt.wait_all();
  const auto expect = oracle_assign(items, 0.45);
  const auto rec = rt.records();
  for (int i = 0; i < 500; ++i)
    CHECK(rec[static_cast<std::size_t>(i)].decision ==
          expect[static_cast<std::size_t>(i)]);
}

TEST_CASE("environment variable selects the spin limit") {
  CHECK(spin_limit_from_env() >= 1);
}
