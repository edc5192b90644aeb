#pragma once

#include <cmath>
#include <compare>
#include <stdexcept>

namespace sigtask {

// Relative importance of a task for the quality of the end result, in
// [0.0, 1.0]. The endpoints are special: 1.0 means the task must run
// accurately no matter what, 0.0 means it must never run accurately.
class Significance {
 public:
  explicit Significance(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0))
      throw std::invalid_argument("significance must lie in [0.0, 1.0]");
  }

  double value() const { return value_; }

  bool forces_accurate() const { return value_ == 1.0; }
  bool forces_approximate() const { return value_ == 0.0; }

  // True when the runtime policy is free to pick either version.
  bool discretionary() const {
    return !forces_accurate() && !forces_approximate();
  }

  friend auto operator<=>(Significance a, Significance b) = default;

 private:
  double value_;
};

// One of the 101 integer levels used by the per-worker history policy.
class DiscreteLevel {
 public:
  static constexpr int kCount = 101;

  explicit DiscreteLevel(Significance s)
      : index_(static_cast<int>(std::lround(s.value() * 100.0))) {}

  explicit DiscreteLevel(int index) : index_(index) {
    if (index < 0 || index >= kCount)
      throw std::invalid_argument("discrete level out of range");
  }

  int index() const { return index_; }
  double as_value() const { return index_ / 100.0; }

  friend auto operator<=>(DiscreteLevel a, DiscreteLevel b) = default;

 private:
  int index_;
};

}  // namespace sigtask
