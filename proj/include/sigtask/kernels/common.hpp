#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace sigtask {

enum class DegreePreset { Mild, Medium, Aggressive };

inline const char* preset_name(DegreePreset p) {
  switch (p) {
    case DegreePreset::Mild: return "mild";
    case DegreePreset::Medium: return "medium";
    case DegreePreset::Aggressive: return "aggressive";
  }
  return "?";
}

inline DegreePreset parse_preset(const std::string& s) {
  if (s == "mild") return DegreePreset::Mild;
  if (s == "medium") return DegreePreset::Medium;
  if (s == "aggressive") return DegreePreset::Aggressive;
  throw std::invalid_argument("unknown preset: " + s);
}

// Accurate-task ratios (Jacobi instead tightens a convergence tolerance).
inline double sobel_preset_ratio(DegreePreset p) {
  switch (p) {
    case DegreePreset::Mild: return 0.80;
    case DegreePreset::Medium: return 0.30;
    case DegreePreset::Aggressive: return 0.0;
  }
  return 1.0;
}

inline double dct_preset_ratio(DegreePreset p) {
  switch (p) {
    case DegreePreset::Mild: return 0.80;
    case DegreePreset::Medium: return 0.40;
    case DegreePreset::Aggressive: return 0.10;
  }
  return 1.0;
}

inline double mc_preset_ratio(DegreePreset p) {
  switch (p) {
    case DegreePreset::Mild: return 1.00;
    case DegreePreset::Medium: return 0.80;
    case DegreePreset::Aggressive: return 0.50;
  }
  return 1.0;
}

inline double kmeans_preset_ratio(DegreePreset p) {
  switch (p) {
    case DegreePreset::Mild: return 0.80;
    case DegreePreset::Medium: return 0.60;
    case DegreePreset::Aggressive: return 0.40;
  }
  return 1.0;
}

inline constexpr double kJacobiNativeTolerance = 1e-5;

inline double jacobi_preset_tolerance(DegreePreset p) {
  switch (p) {
    case DegreePreset::Mild: return 1e-4;
    case DegreePreset::Medium: return 1e-3;
    case DegreePreset::Aggressive: return 1e-2;
  }
  return kJacobiNativeTolerance;
}

// Harness-level knobs shared by all kernels: override the preset ratio, or
// pin every task to one significance value (used by the overhead experiment,
// which runs at ratio 1.0 with uniform significance).
struct KernelTuning {
  std::optional<double> ratio_override;
  std::optional<double> significance_override;
};

// Round-robin significance in {0.1, ..., 0.9}; spreads approximated work
// evenly and avoids the unconditional endpoint values.
inline double cycled_significance(std::uint64_t index) {
  return 0.1 * static_cast<double>(1 + index % 9);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed ^ salt;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace sigtask
