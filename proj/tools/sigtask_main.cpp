// sigtask — benchmark and measurement CLI for the significance-aware task
// runtime. Subcommands: run, sweep, overhead, list-benchmarks.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sigtask/harness.hpp"

namespace {

struct CliOptions {
  std::string bench = "sobel";
  std::string policy = "gtb";
  std::string buffer = "max";
  std::string preset = "mild";
  std::optional<double> ratio;
  std::optional<int> lqh_correction;
  unsigned workers = sigtask::default_workers();
  std::uint64_t seed = 1;
  int size = 0;
  int repetitions = 1;
  std::string out_dir;
  std::string format = "json";
  std::string config_file;
};

sigtask::PolicyConfig parse_policy(const std::string& policy,
                                   const std::string& buffer) {
  if (policy == "agnostic") return sigtask::PolicyConfig::agnostic();
  if (policy == "lqh") return sigtask::PolicyConfig::lqh();
  if (policy == "perforation") return sigtask::PolicyConfig::perforation();
  if (policy == "gtb") {
    if (buffer == "max") return sigtask::PolicyConfig::gtb_max_buffer();
    const long b = std::stol(buffer);
    if (b <= 0) throw CLI::ValidationError("--buffer must be positive or max");
    return sigtask::PolicyConfig::gtb(static_cast<std::size_t>(b));
  }
  throw CLI::ValidationError("unknown policy: " + policy);
}

// File values fill in anything the command line left at its default.
void apply_config_file(CLI::App* cmd, CliOptions& o) {
  if (o.config_file.empty()) return;
  const auto kv = sigtask::parse_config_file(o.config_file);
  auto use = [&](const char* flag, const char* key, auto setter) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    if (auto* opt = cmd->get_option_no_throw(flag); opt && opt->count() > 0)
      return;  // explicit flag wins
    setter(it->second);
  };
  use("--bench", "bench", [&](const std::string& v) { o.bench = v; });
  use("--policy", "policy", [&](const std::string& v) { o.policy = v; });
  use("--buffer", "buffer", [&](const std::string& v) { o.buffer = v; });
  use("--preset", "preset", [&](const std::string& v) { o.preset = v; });
  use("--ratio", "ratio",
      [&](const std::string& v) { o.ratio = std::stod(v); });
  use("--workers", "workers", [&](const std::string& v) {
    o.workers = static_cast<unsigned>(std::stoul(v));
  });
  use("--seed", "seed",
      [&](const std::string& v) { o.seed = std::stoull(v); });
  use("--size", "size", [&](const std::string& v) { o.size = std::stoi(v); });
  use("--repetitions", "repetitions",
      [&](const std::string& v) { o.repetitions = std::stoi(v); });
  use("--out", "out", [&](const std::string& v) { o.out_dir = v; });
  use("--format", "format", [&](const std::string& v) { o.format = v; });
}

void add_common_flags(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("--policy", o.policy,
                  "agnostic | gtb | lqh | perforation");
  cmd->add_option("--buffer", o.buffer, "GTB buffer size or 'max'");
  cmd->add_option("--preset", o.preset, "mild | medium | aggressive");
  cmd->add_option("--ratio", o.ratio, "override the preset accurate ratio");
  cmd->add_option("--lqh-correction", o.lqh_correction,
                  "force the LQH single-level tie-break on (1) or off (0)");
  cmd->add_option("--workers", o.workers, "worker thread count");
  cmd->add_option("--seed", o.seed, "input generation seed");
  cmd->add_option("--size", o.size, "input size (0 = benchmark default)");
  cmd->add_option("--repetitions", o.repetitions,
                  "repetitions; wall time reports the median");
  cmd->add_option("--out", o.out_dir, "output directory for reports");
  cmd->add_option("--format", o.format, "json | csv | both");
  cmd->add_option("--config", o.config_file, "key=value config file");
}

sigtask::RunConfig to_run_config(const CliOptions& o) {
  sigtask::RunConfig cfg;
  cfg.benchmark = o.bench;
  cfg.policy = parse_policy(o.policy, o.buffer);
  cfg.preset = sigtask::parse_preset(o.preset);
  cfg.ratio_override = o.ratio;
  if (o.lqh_correction) cfg.lqh_tiebreak = (*o.lqh_correction != 0);
  cfg.workers = o.workers;
  cfg.seed = o.seed;
  cfg.size = o.size;
  cfg.repetitions = o.repetitions;
  cfg.out_dir = o.out_dir;
  cfg.format = o.format;
  return cfg;
}

int cmd_run(const CliOptions& o) {
  const auto report = sigtask::run_benchmark(to_run_config(o));
  std::cout << sigtask::to_json(report).dump(2) << "\n";
  return report.status == "ok" ? 0 : 1;
}

int cmd_sweep(const CliOptions& o, const std::string& bench_list,
              const std::string& policy_list, const std::string& preset_list) {
  sigtask::SweepSpec spec;
  spec.workers = o.workers;
  spec.seed = o.seed;
  spec.repetitions = o.repetitions;
  spec.size = o.size;
  spec.out_dir = o.out_dir.empty() ? "." : o.out_dir;
  auto split = [](const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : csv) {
      if (c == ',') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  };
  if (!bench_list.empty()) spec.benchmarks = split(bench_list);
  if (!policy_list.empty()) {
    spec.policies.clear();
    for (const auto& p : policy_list.empty()
                             ? std::vector<std::string>{}
                             : split(policy_list)) {
      if (p == "gtb-max")
        spec.policies.push_back(sigtask::PolicyConfig::gtb_max_buffer());
      else
        spec.policies.push_back(parse_policy(p, o.buffer));
    }
  }
  if (!preset_list.empty()) {
    spec.presets.clear();
    for (const auto& p : split(preset_list))
      spec.presets.push_back(sigtask::parse_preset(p));
  }
  const auto rows = sigtask::run_sweep(spec);
  std::cout << sigtask::csv_header() << "\n";
  bool ok = true;
  for (const auto& r : rows) {
    std::cout << sigtask::csv_row(r) << "\n";
    if (r.status != "ok") ok = false;
  }
  std::cerr << rows.size() << " runs, csv written to " << spec.out_dir
            << "/sweep.csv\n";
  return ok ? 0 : 1;
}

int cmd_overhead(const CliOptions& o) {
  const int reps = o.repetitions < 5 ? 5 : o.repetitions;
  const auto rows =
      sigtask::run_overhead(o.workers, reps, o.seed, o.size);
  std::cout << "benchmark        agnostic_secs";
  if (!rows.empty())
    for (const auto& [name, _] : rows.front().normalized)
      std::cout << "  " << std::setw(10) << name;
  std::cout << "\n";
  for (const auto& row : rows) {
    std::cout << std::left << std::setw(16) << row.benchmark << std::right
              << std::fixed << std::setprecision(6) << std::setw(13)
              << row.agnostic_secs;
    for (const auto& [_, v] : row.normalized)
      std::cout << "  " << std::setw(10) << std::setprecision(3) << v;
    std::cout << "\n";
  }
  return 0;
}

int cmd_list() {
  for (const auto& name : sigtask::benchmark_names()) {
    std::cout << std::left << std::setw(14) << name
              << "default size: " << sigtask::default_size(name) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"significance-aware task runtime benchmark harness"};
  app.require_subcommand(1);

  CliOptions o;
  std::string bench_list, policy_list, preset_list;

  auto* run = app.add_subcommand("run", "run one benchmark configuration");
  run->add_option("--bench", o.bench, "benchmark name");
  add_common_flags(run, o);

  auto* sweep = app.add_subcommand(
      "sweep", "run a benchmark x policy x preset matrix, emit CSV");
  sweep->add_option("--bench", bench_list, "comma-separated benchmarks");
  sweep->add_option("--policies", policy_list,
                    "comma-separated policies (gtb uses --buffer; gtb-max)");
  sweep->add_option("--presets", preset_list, "comma-separated presets");
  add_common_flags(sweep, o);

  auto* overhead = app.add_subcommand(
      "overhead",
      "normalized ratio-1.0 uniform-significance times vs the agnostic "
      "runtime");
  add_common_flags(overhead, o);

  auto* list = app.add_subcommand("list-benchmarks", "list benchmark names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      apply_config_file(run, o);
      return cmd_run(o);
    }
    if (sweep->parsed()) {
      apply_config_file(sweep, o);
      return cmd_sweep(o, bench_list, policy_list, preset_list);
    }
    if (overhead->parsed()) {
      apply_config_file(overhead, o);
      return cmd_overhead(o);
    }
    if (list->parsed()) return cmd_list();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
