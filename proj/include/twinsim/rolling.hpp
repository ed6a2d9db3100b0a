#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "twinsim/error.hpp"
#include "twinsim/indicator.hpp"
#include "twinsim/kahan.hpp"
#include "twinsim/trajectory.hpp"

namespace twinsim {

// Which variable pairs a CorrelationWindow tracks. The default tracks the
// full upper triangle; an explicit list bounds memory when only a sparse
// pair structure matters (e.g. derived from the nonzeros of A). Diagonal
// pairs are always tracked so row indicators and degeneracy stay defined.
struct PairSet {
  bool all_pairs = true;
  std::vector<std::pair<int, int>> list;  // normalized i <= j, sorted, deduped

  static PairSet all() { return PairSet{}; }

  static PairSet from_list(std::vector<std::pair<int, int>> pairs, int n) {
    PairSet ps;
    ps.all_pairs = false;
    for (auto& [i, j] : pairs) {
      if (i < 0 || j < 0 || i >= n || j >= n)
        throw RangeError("pair index outside [0, n)");
      if (i > j) std::swap(i, j);
    }
    for (int i = 0; i < n; ++i) pairs.emplace_back(i, i);
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    ps.list = std::move(pairs);
    return ps;
  }
};

// Sliding window of at most k rows with O(tracked pairs) push/pop.
//
// Per pair it keeps jointly-present counts and compensated running sums of
// shifted values; the shift is the pair's first joint observation, fixed
// while any joint row remains in the window. Shifting keeps the sums at the
// scale of the in-window variation, so correlations survive large offsets
// (means around 1e9 with unit variance), and makes a column that is
// constant over the joint rows yield exactly zero sums — the same
// degenerate classification the batch path reaches by direct inspection.
class CorrelationWindow {
public:
  CorrelationWindow(int n, int k, PairSet pairs = PairSet::all(), int min_overlap = 3)
      : n_(n), k_(k), min_overlap_(min_overlap), pairs_(std::move(pairs)) {
    if (n < 1) throw ParameterError("correlation window needs n >= 1");
    if (k < 2) throw ParameterError("window length k must be >= 2");
    const size_t npairs =
        pairs_.all_pairs ? static_cast<size_t>(n) * (n + 1) / 2 : pairs_.list.size();
    states_.assign(npairs, PairState{});
    ring_values_.assign(static_cast<size_t>(k) * n, 0.0);
    ring_present_.assign(static_cast<size_t>(k) * n, 0);
    scratch_.reserve(n);
  }

  int vars() const { return n_; }
  int capacity() const { return k_; }
  int size() const { return size_; }
  bool full() const { return size_ == k_; }

  void push(std::span<const double> values, std::span<const std::uint8_t> present) {
    if (static_cast<int>(values.size()) != n_ || static_cast<int>(present.size()) != n_)
      throw DimensionError("window push: row has wrong width");
    if (full()) throw ParameterError("window already holds k rows; pop first");
    const int slot = (head_ + size_) % k_;
    double* row = ring_values_.data() + static_cast<size_t>(slot) * n_;
    std::uint8_t* mask = ring_present_.data() + static_cast<size_t>(slot) * n_;
    for (int i = 0; i < n_; ++i) {
      row[i] = present[i] ? values[i] : 0.0;
      mask[i] = present[i] ? 1 : 0;
    }
    update_row(row, mask, /*retire=*/false);
    ++size_;
  }

  void pop() {
    if (size_ == 0) throw ParameterError("window is empty");
    const double* row = ring_values_.data() + static_cast<size_t>(head_) * n_;
    const std::uint8_t* mask = ring_present_.data() + static_cast<size_t>(head_) * n_;
    update_row(const_cast<double*>(row), const_cast<std::uint8_t*>(mask), /*retire=*/true);
    head_ = (head_ + 1) % k_;
    --size_;
  }

  // Calls f(i, j, r) for every tracked pair, i <= j, in (i, j) order.
  template <typename Fn>
  void for_each_pair(Fn&& f) const {
    if (pairs_.all_pairs) {
      size_t id = 0;
      for (int i = 0; i < n_; ++i)
        for (int j = i; j < n_; ++j, ++id) f(i, j, pair_r(states_[id], i == j));
    } else {
      for (size_t p = 0; p < pairs_.list.size(); ++p) {
        const auto [i, j] = pairs_.list[p];
        f(i, j, pair_r(states_[p], i == j));
      }
    }
  }

  // Untracked pairs read 0.
  CorrelationMatrix correlation(int anchor_t) const {
    CorrelationMatrix R(n_, anchor_t);
    for_each_pair([&](int i, int j, double r) { R.set(i, j, r); });
    return R;
  }

  struct PairMoments {
    long count = 0;
    double shift_i = 0, shift_j = 0;
    double si = 0, sj = 0, sii = 0, sjj = 0, sij = 0;  // sums of shifted values
  };

  PairMoments moments(int i, int j) const {
    if (i > j) std::swap(i, j);
    const PairState* st = nullptr;
    if (pairs_.all_pairs) {
      st = &states_[pack(i, j)];
    } else {
      auto it = std::lower_bound(pairs_.list.begin(), pairs_.list.end(), std::pair{i, j});
      if (it == pairs_.list.end() || *it != std::pair{i, j})
        throw RangeError("pair not tracked by this window");
      st = &states_[static_cast<size_t>(it - pairs_.list.begin())];
    }
    return {st->cnt,        st->shift_i,      st->shift_j,      st->si.value(),
            st->sj.value(), st->sii.value(),  st->sjj.value(),  st->sij.value()};
  }

private:
  struct PairState {
    KahanSum<double> si, sj, sii, sjj, sij;
    double shift_i = 0.0, shift_j = 0.0;
    std::int32_t cnt = 0;

    void clear() { *this = PairState{}; }
  };

  size_t pack(int i, int j) const {
    return static_cast<size_t>(i) * (2 * n_ - i + 1) / 2 + (j - i);
  }

  void accumulate(PairState& st, double xi, double xj, bool retire) {
    if (retire) {
      const double di = xi - st.shift_i;
      const double dj = xj - st.shift_j;
      st.si.subtract(di);
      st.sj.subtract(dj);
      st.sii.subtract(di * di);
      st.sjj.subtract(dj * dj);
      st.sij.subtract(di * dj);
      if (--st.cnt == 0) st.clear();  // exact zeros, fresh shift next entry
    } else {
      if (st.cnt == 0) {
        st.shift_i = xi;
        st.shift_j = xj;
      }
      const double di = xi - st.shift_i;
      const double dj = xj - st.shift_j;
      st.si.add(di);
      st.sj.add(dj);
      st.sii.add(di * di);
      st.sjj.add(dj * dj);
      st.sij.add(di * dj);
      ++st.cnt;
    }
  }

  void update_row(const double* row, const std::uint8_t* mask, bool retire) {
    if (pairs_.all_pairs) {
      scratch_.clear();
      for (int i = 0; i < n_; ++i)
        if (mask[i]) scratch_.push_back(i);
      for (size_t a = 0; a < scratch_.size(); ++a) {
        const int i = scratch_[a];
        const double xi = row[i];
        const size_t base = pack(i, i);
        for (size_t b = a; b < scratch_.size(); ++b) {
          const int j = scratch_[b];
          accumulate(states_[base + (j - i)], xi, row[j], retire);
        }
      }
    } else {
      for (size_t p = 0; p < pairs_.list.size(); ++p) {
        const auto [i, j] = pairs_.list[p];
        if (mask[i] && mask[j]) accumulate(states_[p], row[i], row[j], retire);
      }
    }
  }

  double pair_r(const PairState& st, bool diagonal) const {
    if (st.cnt < min_overlap_) return 0.0;
    const double c = static_cast<double>(st.cnt);
    const double si = st.si.value();
    const double sj = st.sj.value();
    const double den_i = st.sii.value() - si * si / c;
    const double den_j = st.sjj.value() - sj * sj / c;
    if (!(den_i > 0.0) || !(den_j > 0.0)) return 0.0;
    if (diagonal) return 1.0;
    const double num = st.sij.value() - si * sj / c;
    return detail::clamp_correlation(num / std::sqrt(den_i * den_j));
  }

  int n_;
  int k_;
  int min_overlap_;
  PairSet pairs_;
  std::vector<PairState> states_;
  std::vector<double> ring_values_;
  std::vector<std::uint8_t> ring_present_;
  std::vector<int> scratch_;
  int head_ = 0;
  int size_ = 0;
};

// Streaming indicator: rows arrive in step order, each step beyond the
// first k-1 emits the same G_i(t) / G_t(t) rows as the batch path.
class IncrementalIndicator {
public:
  IncrementalIndicator(int n, int k, IndicatorOptions opts = {}, PairSet pairs = PairSet::all(),
                       std::vector<std::string> var_names = {})
      : opts_(std::move(opts)), window_(n, k, std::move(pairs), opts_.min_overlap) {
    rep_.k = k;
    rep_.label = opts_.label;
    rep_.exclude_diagonal = opts_.exclude_diagonal;
    if (var_names.empty()) {
      for (int i = 1; i <= n; ++i) rep_.var_names.push_back("x" + std::to_string(i));
    } else {
      if (static_cast<int>(var_names.size()) != n)
        throw DimensionError("incremental indicator: name count does not match n");
      rep_.var_names = std::move(var_names);
    }
    g_buf_.assign(n, 0.0);
  }

  void push_row(int t, std::span<const double> values, std::span<const std::uint8_t> present) {
    if (started_ && t != expected_)
      throw SequencingError("row for step " + std::to_string(t) + " arrived, expected " +
                            std::to_string(expected_));
    if (window_.full()) window_.pop();
    window_.push(values, present);
    started_ = true;
    expected_ = t + 1;

    if (!window_.full()) return;
    const int n = window_.vars();
    std::fill(g_buf_.begin(), g_buf_.end(), 0.0);
    window_.for_each_pair([&](int i, int j, double r) {
      const double a = std::abs(r);
      if (i == j) {
        if (!opts_.exclude_diagonal) g_buf_[i] += a;
      } else {
        g_buf_[i] += a;
        g_buf_[j] += a;
      }
    });
    rep_.valid_steps.push_back(t);
    double row_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      rep_.g_i.push_back(g_buf_[i]);
      row_sum += g_buf_[i];
    }
    rep_.g_t.push_back(row_sum);
    total_.add(row_sum);
  }

  // Report over everything pushed so far.
  IndicatorReport report() const {
    if (rep_.valid_steps.empty())
      throw ParameterError("fewer rows than k were pushed; indicator undefined");
    IndicatorReport out = rep_;
    out.g = total_.value();
    return out;
  }

private:
  IndicatorOptions opts_;
  CorrelationWindow window_;
  IndicatorReport rep_;
  KahanSum<double> total_;
  std::vector<double> g_buf_;
  bool started_ = false;
  int expected_ = 0;
};

// Incremental counterpart of integral_indicator; identical report up to
// floating-point differences between the two summation routes.
inline IndicatorReport incremental_indicator(const Trajectory& traj, int k,
                                             const IndicatorOptions& opts = {},
                                             PairSet pairs = PairSet::all()) {
  if (traj.steps() < k)
    throw ParameterError("trajectory has " + std::to_string(traj.steps()) +
                         " rows, needs at least k = " + std::to_string(k));
  IncrementalIndicator inc(traj.vars(), k, opts, std::move(pairs), traj.names());
  for (int t = traj.t0(); t <= traj.t_last(); ++t)
    inc.push_row(t, traj.row_values(t), traj.row_present(t));
  return inc.report();
}

}  // namespace twinsim
