#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sigtask/quality.hpp"
#include "sigtask/version.hpp"

namespace sigtask {

// Aggregate result of one benchmark run. Energy is not measured; wall-clock
// time and the accurate-task fraction stand in as proxies, and every report
// says so.
struct QualityReport {
  std::string benchmark;
  std::string policy;
  std::string preset;
  double requested_ratio = 1.0;
  double provided_ratio = 1.0;        // over discretionary tasks
  double accurate_fraction = 1.0;     // over all tasks
  double inversion_pct = 0.0;
  double ratio_diff = 0.0;
  std::string quality_metric;         // "psnr_db" | "rel_err_pct" | "none"
  double quality_value = 0.0;
  double wall_secs = 0.0;             // spawn-to-barrier, median over reps
  std::uint64_t seed = 0;
  unsigned workers = 0;
  int size = 0;
  int repetitions = 1;
  std::uint64_t tasks = 0;
  std::uint64_t tasks_accurate = 0;
  std::uint64_t tasks_approximate = 0;
  std::uint64_t tasks_dropped = 0;
  int iterations = 0;                 // kernel sweeps/iterations where relevant
  int undefined_estimates = 0;        // MC points left without any walk
  std::string status = "ok";
  std::vector<FidelityUnit> units;
  std::vector<std::pair<std::string, std::string>> config;  // resolved config

  static constexpr const char* kEnergyNote =
      "energy not measured; wall-clock time and accurate-task fraction serve "
      "as proxies";
};

namespace detail {

// JSON has no infinity; map it to null and let the CSV spell it out.
inline nlohmann::ordered_json json_number(double v) {
  if (std::isinf(v) || std::isnan(v)) return nullptr;
  return v;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const QualityReport& r) {
  nlohmann::ordered_json j;
  j["benchmark"] = r.benchmark;
  j["policy"] = r.policy;
  j["preset"] = r.preset;
  j["requested_ratio"] = r.requested_ratio;
  j["provided_ratio"] = r.provided_ratio;
  j["accurate_fraction"] = r.accurate_fraction;
  j["inversion_pct"] = r.inversion_pct;
  j["ratio_diff"] = r.ratio_diff;
  j["quality_metric"] = r.quality_metric;
  j["quality_value"] = detail::json_number(r.quality_value);
  j["wall_secs"] = r.wall_secs;
  j["seed"] = r.seed;
  j["workers"] = r.workers;
  j["size"] = r.size;
  j["repetitions"] = r.repetitions;
  j["tasks"] = r.tasks;
  j["tasks_accurate"] = r.tasks_accurate;
  j["tasks_approximate"] = r.tasks_approximate;
  j["tasks_dropped"] = r.tasks_dropped;
  if (r.iterations) j["iterations"] = r.iterations;
  if (r.undefined_estimates) j["undefined_estimates"] = r.undefined_estimates;
  j["status"] = r.status;
  j["energy_note"] = QualityReport::kEnergyNote;
  j["version"] = kVersion;
  nlohmann::ordered_json units = nlohmann::ordered_json::array();
  for (const auto& u : r.units) {
    nlohmann::ordered_json ju;
    ju["group"] = u.group;
    ju["epoch"] = u.epoch;
    ju["requested"] = u.requested;
    ju["provided"] = u.provided();
    ju["tasks"] = u.total;
    ju["accurate"] = u.accurate;
    ju["approximate"] = u.approximate;
    ju["dropped"] = u.dropped;
    ju["inverted"] = u.inverted;
    units.push_back(ju);
  }
  j["group_epochs"] = units;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : r.config) cfg[k] = v;
  j["resolved_config"] = cfg;
  return j;
}

inline std::string csv_header() {
  return "benchmark,policy,preset,requested_ratio,provided_ratio,"
         "inversion_pct,ratio_diff,quality_value,quality_metric,wall_secs,"
         "seed";
}

inline std::string csv_row(const QualityReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << r.benchmark << ',' << r.policy << ',' << r.preset << ','
     << r.requested_ratio << ',' << r.provided_ratio << ',' << r.inversion_pct
     << ',' << r.ratio_diff << ',';
  if (std::isinf(r.quality_value))
    os << "inf";
  else
    os << r.quality_value;
  os << ',' << r.quality_metric << ',' << r.wall_secs << ',' << r.seed;
  return os.str();
}

inline void write_json_report(const QualityReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << to_json(r).dump(2) << "\n";
}

// Flat binary dump: one ASCII metadata line, then raw little-endian f64.
inline void write_f64_bin(std::span<const double> values,
                          const std::string& label, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "sigtask-bin v1 " << label << " count=" << values.size()
      << " dtype=f64\n";
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline void append_csv_report(const QualityReport& r, const std::string& path) {
  const bool fresh = [&] {
    std::ifstream probe(path);
    return !probe.good();
  }();
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path);
  if (fresh) out << csv_header() << "\n";
  out << csv_row(r) << "\n";
}

}  // namespace sigtask
