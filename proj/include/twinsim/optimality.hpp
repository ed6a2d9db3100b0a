#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "twinsim/error.hpp"
#include "twinsim/model.hpp"

namespace twinsim {

// Goal parameter J. indicator_total ranks finished regimes by their
// integral indicator; state_target is an additive per-step cost over state
// coordinates and is the form the dynamic program can optimize.
struct Objective {
  enum class Mode { indicator_total, state_target };
  enum class Norm { absolute, quadratic };

  struct Term {
    int var = 0;  // state coordinate, 0-based
    double weight = 1.0;
    double target = 0.0;
  };

  Mode mode = Mode::indicator_total;
  bool minimize = true;
  Norm norm = Norm::absolute;
  std::vector<Term> terms;

  double state_cost(std::span<const double> x) const {
    double c = 0.0;
    for (const auto& t : terms) {
      const double d = x[static_cast<size_t>(t.var)] - t.target;
      c += t.weight * (norm == Norm::absolute ? std::abs(d) : d * d);
    }
    return c;
  }
};

// Uniform per-coordinate grid; states are snapped to the nearest point
// after every transition, which is the discretization the value iteration
// is exact on.
struct GridSpec {
  std::vector<double> lo, hi;
  std::vector<int> points;

  void validate(int n) const {
    if (static_cast<int>(lo.size()) != n || static_cast<int>(hi.size()) != n ||
        static_cast<int>(points.size()) != n)
      throw DimensionError("grid spec must give lo/hi/points for each of the " +
                           std::to_string(n) + " state coordinates");
    for (int d = 0; d < n; ++d) {
      if (points[d] < 1) throw ParameterError("grid needs at least one point per coordinate");
      if (points[d] > 1 && !(lo[d] < hi[d]))
        throw ParameterError("grid coordinate " + std::to_string(d + 1) + " has lo >= hi");
    }
  }

  size_t total() const {
    size_t t = 1;
    for (int p : points) {
      if (t > (size_t{1} << 40) / static_cast<size_t>(p)) return size_t{1} << 40;
      t *= static_cast<size_t>(p);
    }
    return t;
  }

  double coord(int d, int idx) const {
    if (points[d] == 1) return lo[d];
    return lo[d] + (hi[d] - lo[d]) * static_cast<double>(idx) / (points[d] - 1);
  }

  int snap_index(int d, double x) const {
    if (points[d] == 1) return 0;
    const double h = (hi[d] - lo[d]) / (points[d] - 1);
    const double clamped = std::clamp(x, lo[d], hi[d]);
    const int idx = static_cast<int>(std::lround((clamped - lo[d]) / h));
    return std::clamp(idx, 0, points[d] - 1);
  }
};

// Finite per-step control set: one m-vector per action.
struct ActionSet {
  std::vector<std::vector<double>> actions;
};

struct OptimalityResult {
  std::vector<int> action_indices;             // one per step, 0-based into the action set
  std::vector<std::vector<double>> controls;   // the corresponding u vectors
  double value = 0.0;
};

namespace detail {

constexpr int kMaxDpActions = 64;
constexpr int kMaxDpHorizon = 64;
constexpr size_t kMaxDpStates = 1u << 20;

}  // namespace detail

// Backward-induction check of control optimality on a snapped state grid:
//
//   V_T(s) = 0,   V_t(s) = min_a [ cost(s') + V_{t+1}(s') ],  s' = snap(A(t+1) s + B(t+1) a)
//
// The returned value is the exact optimum of the discretized problem (it
// matches exhaustive enumeration of action sequences bit for bit). This is
// a desk-scale advisory, not a general optimal controller: budgets are
// deliberately small.
inline OptimalityResult check_optimality(const SystemModel& model, const Objective& objective,
                                         const ActionSet& controls, int horizon,
                                         const GridSpec& grid, std::span<const double> x0) {
  model.validate();
  grid.validate(model.n);
  if (objective.mode != Objective::Mode::state_target)
    throw ParameterError("the optimality check needs a state-target objective");
  if (controls.actions.empty()) throw ParameterError("empty control set");
  if (static_cast<int>(controls.actions.size()) > detail::kMaxDpActions)
    throw ResourceError("control set exceeds " + std::to_string(detail::kMaxDpActions) +
                        " actions; reduce the action set");
  if (horizon < 1 || horizon > detail::kMaxDpHorizon)
    throw ResourceError("horizon must be in [1, " + std::to_string(detail::kMaxDpHorizon) +
                        "]; reduce the horizon");
  if (horizon > model.T)
    throw RangeError("horizon exceeds the model horizon T");
  const size_t nstates = grid.total();
  if (nstates > detail::kMaxDpStates)
    throw ResourceError("state grid has " + std::to_string(nstates) +
                        " points; reduce the grid (budget " +
                        std::to_string(detail::kMaxDpStates) + ")");
  for (const auto& a : controls.actions)
    if (static_cast<int>(a.size()) != model.m)
      throw DimensionError("every action must have dimension m = " + std::to_string(model.m));
  if (static_cast<int>(x0.size()) != model.n)
    throw DimensionError("x0 must have dimension n");
  for (const auto& t : objective.terms)
    if (t.var < 0 || t.var >= model.n)
      throw DimensionError("objective references state coordinate " + std::to_string(t.var + 1) +
                           " outside the model");

  const int n = model.n;
  const double sign = objective.minimize ? 1.0 : -1.0;

  auto index_to_state = [&](size_t s, std::vector<double>& x) {
    for (int d = 0; d < n; ++d) {
      x[d] = grid.coord(d, static_cast<int>(s % grid.points[d]));
      s /= static_cast<size_t>(grid.points[d]);
    }
  };
  auto snap_to_index = [&](std::span<const double> x) {
    size_t s = 0;
    size_t stride = 1;
    for (int d = 0; d < n; ++d) {
      s += stride * static_cast<size_t>(grid.snap_index(d, x[d]));
      stride *= static_cast<size_t>(grid.points[d]);
    }
    return s;
  };

  const std::vector<double> zero_v(model.l, 0.0);  // the check is deterministic: v = 0

  // next[t][s][a] would be wasteful; transitions are recomputed per sweep.
  std::vector<double> value(nstates, 0.0);          // V_{t+1}
  std::vector<double> value_next(nstates, 0.0);     // V_t under construction
  std::vector<std::vector<std::int16_t>> choice(
      static_cast<size_t>(horizon), std::vector<std::int16_t>(nstates, 0));

  std::vector<double> x(n), xn;
  for (int t = horizon - 1; t >= 0; --t) {
    for (size_t s = 0; s < nstates; ++s) {
      index_to_state(s, x);
      double best = std::numeric_limits<double>::infinity();
      std::int16_t best_a = 0;
      for (size_t a = 0; a < controls.actions.size(); ++a) {
        xn = step(model, x, controls.actions[a], zero_v, t + 1);
        const size_t sn = snap_to_index(xn);
        index_to_state(sn, xn);
        const double cand = sign * objective.state_cost(xn) + value[sn];
        if (cand < best) {
          best = cand;
          best_a = static_cast<std::int16_t>(a);
        }
      }
      value_next[s] = best;
      choice[static_cast<size_t>(t)][s] = best_a;
    }
    std::swap(value, value_next);
  }

  OptimalityResult res;
  std::vector<double> xs(x0.begin(), x0.end());
  size_t s = snap_to_index(xs);
  res.value = sign * value[s];
  for (int t = 0; t < horizon; ++t) {
    const int a = choice[static_cast<size_t>(t)][s];
    res.action_indices.push_back(a);
    res.controls.push_back(controls.actions[static_cast<size_t>(a)]);
    index_to_state(s, x);
    xs = step(model, x, controls.actions[static_cast<size_t>(a)], zero_v, t + 1);
    s = snap_to_index(xs);
  }
  return res;
}

}  // namespace twinsim
