#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "twinsim/error.hpp"

namespace twinsim {

// T x n grid of state values indexed by absolute step t (1-based by
// default). Missing cells are carried explicitly; their value slot is
// pinned to 0 so whole-grid comparisons stay well defined.
class Trajectory {
public:
  Trajectory() = default;

  Trajectory(int steps, int n, int t0 = 1, std::vector<std::string> names = {})
      : steps_(steps), n_(n), t0_(t0), names_(std::move(names)) {
    if (steps < 0 || n < 1) throw ParameterError("trajectory needs n >= 1 and steps >= 0");
    if (names_.empty()) {
      names_.reserve(n);
      for (int i = 1; i <= n; ++i) names_.push_back("x" + std::to_string(i));
    }
    if (static_cast<int>(names_.size()) != n)
      throw DimensionError("trajectory: " + std::to_string(names_.size()) +
                           " names for " + std::to_string(n) + " variables");
    values_.assign(static_cast<size_t>(steps) * n, 0.0);
    present_.assign(static_cast<size_t>(steps) * n, 1);
  }

  int steps() const { return steps_; }
  int vars() const { return n_; }
  int t0() const { return t0_; }
  int t_last() const { return t0_ + steps_ - 1; }

  const std::vector<std::string>& names() const { return names_; }
  void set_names(std::vector<std::string> names) {
    if (static_cast<int>(names.size()) != n_)
      throw DimensionError("trajectory: name count does not match variable count");
    names_ = std::move(names);
  }

  // -1 when the name is unknown.
  int index_of(const std::string& name) const {
    for (int i = 0; i < n_; ++i)
      if (names_[i] == name) return i;
    return -1;
  }

  bool present(int t, int i) const { return present_[cell(t, i)] != 0; }
  double value(int t, int i) const { return values_[cell(t, i)]; }

  void set(int t, int i, double v) {
    size_t c = cell(t, i);
    values_[c] = v;
    present_[c] = 1;
  }

  void set_missing(int t, int i) {
    size_t c = cell(t, i);
    values_[c] = 0.0;
    present_[c] = 0;
  }

  std::span<const double> row_values(int t) const {
    return {values_.data() + row_offset(t), static_cast<size_t>(n_)};
  }
  std::span<const std::uint8_t> row_present(int t) const {
    return {present_.data() + row_offset(t), static_cast<size_t>(n_)};
  }

  size_t missing_count(int i) const {
    size_t c = 0;
    for (int t = 0; t < steps_; ++t)
      if (!present_[static_cast<size_t>(t) * n_ + i]) ++c;
    return c;
  }

  friend bool operator==(const Trajectory& a, const Trajectory& b) {
    return a.steps_ == b.steps_ && a.n_ == b.n_ && a.t0_ == b.t0_ &&
           a.names_ == b.names_ && a.present_ == b.present_ && a.values_ == b.values_;
  }

private:
  size_t row_offset(int t) const {
    int r = t - t0_;
    if (r < 0 || r >= steps_)
      throw RangeError("step " + std::to_string(t) + " outside trajectory [" +
                       std::to_string(t0_) + ", " + std::to_string(t_last()) + "]");
    return static_cast<size_t>(r) * n_;
  }
  size_t cell(int t, int i) const {
    if (i < 0 || i >= n_) throw RangeError("variable index " + std::to_string(i) + " out of range");
    return row_offset(t) + static_cast<size_t>(i);
  }

  int steps_ = 0;
  int n_ = 1;
  int t0_ = 1;
  std::vector<std::string> names_;
  std::vector<double> values_;         // steps x n, row-major; 0 where missing
  std::vector<std::uint8_t> present_;  // 1 = observed
};

}  // namespace twinsim
