#pragma once

#include <cmath>

namespace twinsim {

// Compensated accumulator (Neumaier variant). Unlike plain Kahan it stays
// accurate when an addend exceeds the running sum, which happens routinely
// when a sliding window retires its largest row.
template <typename T = double>
class KahanSum {
public:
  KahanSum() = default;
  explicit KahanSum(T init) : sum_(init) {}

  void add(T x) {
    const T t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  void subtract(T x) { add(-x); }

  T value() const { return sum_ + comp_; }

  void reset() {
    sum_ = T{0};
    comp_ = T{0};
  }

private:
  T sum_{0};
  T comp_{0};
};

}  // namespace twinsim
