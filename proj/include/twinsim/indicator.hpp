#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "twinsim/error.hpp"
#include "twinsim/kahan.hpp"
#include "twinsim/trajectory.hpp"

namespace twinsim {

struct IndicatorOptions {
  bool exclude_diagonal = false;  // drop r_ii from the row sums
  int min_overlap = 3;            // pairs with fewer joint observations score 0
  int threads = 1;                // batch path only; results are thread-count invariant
  std::string label;
};

// Symmetric n x n correlation matrix anchored at step t; upper triangle
// stored once.
class CorrelationMatrix {
public:
  CorrelationMatrix(int n, int t) : n_(n), t_(t) {
    if (n < 1) throw ParameterError("correlation matrix needs n >= 1");
    r_.assign(static_cast<size_t>(n) * (n + 1) / 2, 0.0);
  }

  int dim() const { return n_; }
  int anchor() const { return t_; }

  double r(int i, int j) const { return r_[pack(i, j)]; }
  void set(int i, int j, double v) { r_[pack(i, j)] = v; }

private:
  size_t pack(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_)
      throw RangeError("correlation index out of range");
    if (i > j) std::swap(i, j);
    // row-packed upper triangle: offset of row i, then j - i
    return static_cast<size_t>(i) * (2 * n_ - i + 1) / 2 + (j - i);
  }

  int n_;
  int t_;
  std::vector<double> r_;
};

// Row indicators and their aggregate over all valid steps.
struct IndicatorReport {
  int k = 0;
  std::string label;
  std::vector<std::string> var_names;
  std::vector<int> valid_steps;   // anchor steps with a full window, ascending
  std::vector<double> g_t;        // one per valid step
  std::vector<double> g_i;        // valid_steps.size() x n, row-major
  double g = 0.0;
  bool exclude_diagonal = false;

  int vars() const { return static_cast<int>(var_names.size()); }

  double gi(size_t step_idx, int var) const {
    return g_i[step_idx * var_names.size() + static_cast<size_t>(var)];
  }

  friend bool operator==(const IndicatorReport&, const IndicatorReport&) = default;
};

namespace detail {

inline double clamp_correlation(double r) { return std::clamp(r, -1.0, 1.0); }

// Pairwise-complete Pearson coefficient of columns i and j over the window
// rows [first, last]. Two passes over the jointly present rows. Degenerate
// pairs (overlap below min_overlap, or a column constant across the joint
// rows) score 0; the diagonal of a nondegenerate variable is exactly 1.
inline double batch_pair_correlation(const Trajectory& traj, int first, int last, int i, int j,
                                     int min_overlap) {
  int cnt = 0;
  double mean_i = 0.0, mean_j = 0.0;
  double min_i = 0.0, max_i = 0.0, min_j = 0.0, max_j = 0.0;
  for (int t = first; t <= last; ++t) {
    if (!traj.present(t, i) || !traj.present(t, j)) continue;
    const double xi = traj.value(t, i);
    const double xj = traj.value(t, j);
    if (cnt == 0) {
      min_i = max_i = xi;
      min_j = max_j = xj;
    } else {
      min_i = std::min(min_i, xi);
      max_i = std::max(max_i, xi);
      min_j = std::min(min_j, xj);
      max_j = std::max(max_j, xj);
    }
    mean_i += xi;
    mean_j += xj;
    ++cnt;
  }
  if (cnt < min_overlap) return 0.0;
  if (min_i == max_i || min_j == max_j) return 0.0;  // constant over joint rows
  if (i == j) return 1.0;

  mean_i /= cnt;
  mean_j /= cnt;
  double ss_i = 0.0, ss_j = 0.0, cross = 0.0;
  for (int t = first; t <= last; ++t) {
    if (!traj.present(t, i) || !traj.present(t, j)) continue;
    const double di = traj.value(t, i) - mean_i;
    const double dj = traj.value(t, j) - mean_j;
    ss_i += di * di;
    ss_j += dj * dj;
    cross += di * dj;
  }
  if (ss_i <= 0.0 || ss_j <= 0.0) return 0.0;
  return clamp_correlation(cross / std::sqrt(ss_i * ss_j));
}

inline void check_window(const Trajectory& traj, int t, int k) {
  if (k < 2) throw ParameterError("window length k must be >= 2");
  if (t - k + 1 < traj.t0())
    throw RangeError("window of length " + std::to_string(k) + " ending at step " +
                     std::to_string(t) + " starts before the trajectory");
  if (t > traj.t_last())
    throw RangeError("window anchor " + std::to_string(t) + " beyond trajectory end");
}

// Splits [0, count) into near-equal chunks and runs fn(begin, end) on each
// from its own thread. Deterministic partition.
template <typename Fn>
inline void parallel_chunks(size_t count, int threads, Fn&& fn) {
  int nthreads = std::max(1, threads);
  if (count < 2 * static_cast<size_t>(nthreads)) nthreads = 1;
  if (nthreads == 1) {
    fn(size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  const size_t chunk = (count + nthreads - 1) / nthreads;
  for (int w = 0; w < nthreads; ++w) {
    const size_t b = std::min(count, static_cast<size_t>(w) * chunk);
    const size_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Pearson correlation matrix of the k rows ending at step t, computed
// pairwise-complete over jointly present observations.
inline CorrelationMatrix window_correlation(const Trajectory& traj, int t, int k,
                                            const IndicatorOptions& opts = {}) {
  detail::check_window(traj, t, k);
  const int n = traj.vars();
  CorrelationMatrix R(n, t);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      R.set(i, j, detail::batch_pair_correlation(traj, t - k + 1, t, i, j, opts.min_overlap));
  return R;
}

// G_i = sum_j |r_ij|, diagonal included unless excluded by option.
inline std::vector<double> row_indicator(const CorrelationMatrix& R,
                                         bool exclude_diagonal = false) {
  const int n = R.dim();
  std::vector<double> g(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double a = std::abs(R.r(i, j));
      if (i == j) {
        if (!exclude_diagonal) g[i] += a;
      } else {
        g[i] += a;
        g[j] += a;
      }
    }
  }
  return g;
}

// Batch reference path: recomputes R_k(t) for every step with a full
// window and aggregates G. Steps without a full window are excluded, never
// imputed. With opts.threads > 1 the anchor steps are partitioned across
// threads; the final sums run in fixed step order, so results do not depend
// on the thread count.
inline IndicatorReport integral_indicator(const Trajectory& traj, int k,
                                          const IndicatorOptions& opts = {}) {
  if (k < 2) throw ParameterError("window length k must be >= 2");
  if (traj.steps() < k)
    throw ParameterError("trajectory has " + std::to_string(traj.steps()) +
                         " rows, needs at least k = " + std::to_string(k));
  const int n = traj.vars();
  const int first_valid = traj.t0() + k - 1;
  const int last_valid = traj.t_last();
  const size_t nvalid = static_cast<size_t>(last_valid - first_valid + 1);

  IndicatorReport rep;
  rep.k = k;
  rep.label = opts.label;
  rep.var_names = traj.names();
  rep.exclude_diagonal = opts.exclude_diagonal;
  rep.valid_steps.resize(nvalid);
  rep.g_t.resize(nvalid);
  rep.g_i.assign(nvalid * n, 0.0);

  detail::parallel_chunks(nvalid, opts.threads, [&](size_t b, size_t e) {
    for (size_t s = b; s < e; ++s) {
      const int t = first_valid + static_cast<int>(s);
      CorrelationMatrix R = window_correlation(traj, t, k, opts);
      std::vector<double> g = row_indicator(R, opts.exclude_diagonal);
      rep.valid_steps[s] = t;
      double row_sum = 0.0;
      for (int i = 0; i < n; ++i) {
        rep.g_i[s * n + i] = g[i];
        row_sum += g[i];
      }
      rep.g_t[s] = row_sum;
    }
  });

  KahanSum<double> total;
  for (double gt : rep.g_t) total.add(gt);
  rep.g = total.value();
  return rep;
}

}  // namespace twinsim
