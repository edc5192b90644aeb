// Minimal API walkthrough: one group, a few dependent tasks with accurate
// and approximate versions, and a look at the decisions the policy made.

#include <cstdio>
#include <vector>

#include "sigtask/runtime.hpp"

int main() {
  using namespace sigtask;

  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  const GroupId g = rt.init_group("demo", 0.5);

  std::vector<double> data(8, 0.0);
  const RegionId data_region = RegionId::of(data.data());

  // Producer writes the buffer; the scaled variants read it afterwards.
  rt.spawn(
      g, Significance(1.0),
      [&data] {
        for (std::size_t i = 0; i < data.size(); ++i)
          data[i] = static_cast<double>(i);
      },
      {}, {}, {data_region});

  std::vector<double> out(4, 0.0);
  for (int t = 0; t < 4; ++t) {
    const RegionId inputs[] = {data_region};
    const RegionId outputs[] = {RegionId::of(&out[static_cast<std::size_t>(t)])};
    rt.spawn(
        g, Significance(0.2 * (t + 1)),
        [&data, &out, t] {
          double acc = 0.0;
          for (double v : data) acc += v * v;
          out[static_cast<std::size_t>(t)] = acc * (t + 1);
        },
        [&data, &out, t] {
          out[static_cast<std::size_t>(t)] = data.back() * (t + 1);  // rough
        },
        std::span<const RegionId>(inputs), std::span<const RegionId>(outputs));
  }
  rt.wait_all();

  for (const auto& r : rt.records())
    std::printf("task %llu  sig %.2f  %s  worker %d\n",
                static_cast<unsigned long long>(r.id), r.significance,
                to_string(r.decision), r.worker);
  return 0;
}
