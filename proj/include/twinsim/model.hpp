#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "twinsim/error.hpp"
#include "twinsim/matrix.hpp"
#include "twinsim/trajectory.hpp"

namespace twinsim {

struct SinusoidComponent {
  int var = 0;         // disturbance coordinate, 0-based
  double amplitude = 0.0;
  double period = 1.0;  // steps per cycle, > 0
  double phase = 0.0;   // radians
};

// Environmental excitation: per-coordinate sinusoids plus optional seeded
// white noise. Identical (spec, seed) always replays the same sequence.
struct DisturbanceSpec {
  std::vector<SinusoidComponent> sinusoids;
  std::vector<double> noise;  // per-coordinate magnitude; empty = no noise

  void validate(int l) const {
    for (const auto& s : sinusoids) {
      if (s.var < 0 || s.var >= l)
        throw DimensionError("sinusoid coordinate " + std::to_string(s.var + 1) +
                             " outside disturbance dimension " + std::to_string(l));
      if (!(s.period > 0.0)) throw ParameterError("sinusoid period must be > 0");
    }
    if (!noise.empty() && static_cast<int>(noise.size()) != l)
      throw DimensionError("noise magnitude list must have one entry per disturbance coordinate");
    for (double m : noise)
      if (m < 0.0) throw ParameterError("noise magnitude must be >= 0");
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

// Deterministic sampler for v(t). Noise draws are keyed on (seed, t) so the
// sequence does not depend on evaluation order.
class DisturbanceSampler {
public:
  DisturbanceSampler(const DisturbanceSpec& spec, int l, std::uint64_t seed)
      : spec_(spec), l_(l), seed_(seed) {
    spec.validate(l);
  }

  std::vector<double> at(int t) const {
    std::vector<double> v(l_, 0.0);
    for (const auto& s : spec_.sinusoids)
      v[s.var] += s.amplitude *
                  std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / s.period + s.phase);
    if (!spec_.noise.empty()) {
      std::mt19937_64 rng(detail::splitmix64(seed_ ^ detail::splitmix64(static_cast<std::uint64_t>(t))));
      for (int i = 0; i < l_; ++i) {
        if (spec_.noise[i] > 0.0) v[i] += spec_.noise[i] * normal_draw(rng);
      }
    }
    return v;
  }

private:
  // Box-Muller on explicit uniforms; no stdlib distribution so that the
  // stream is identical across standard library implementations.
  static double normal_draw(std::mt19937_64& rng) {
    const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53;  // (0, 1]
    const double u2 = static_cast<double>(rng() >> 11) * 0x1p-53;          // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  const DisturbanceSpec& spec_;
  int l_ = 0;
  std::uint64_t seed_ = 0;
};

// Time-varying linear system
//
//   x(t+1) = A(t) x(t) + B(t) u(t) + embed(v(t)),   y(t) = H x(t)
//
// A and B are step-indexed schedules; H defaults to the identity, in which
// case the observation is the state itself. The disturbance embeds into the
// first min(l, n) state coordinates unless an explicit l x n routing matrix
// is given.
struct SystemModel {
  int n = 1;  // state dimension
  int m = 0;  // control dimension
  int l = 0;  // disturbance dimension
  int T = 1;  // horizon in steps

  MatrixSchedule A;                  // n x n per step
  std::optional<MatrixSchedule> B;   // n x m per step; required when m > 0
  std::optional<Matrix> H;           // k_out x n; absent = identity
  std::optional<Matrix> routing;     // l x n disturbance routing

  std::vector<std::string> var_names;  // size n or empty (defaults x1..xn)
  std::vector<double> x0;              // size n or empty (defaults to zeros)
  DisturbanceSpec disturbance;
  std::uint64_t seed = 0;
  std::string label;

  int k_out() const { return H ? H->rows() : n; }

  void validate() const {
    if (n < 1) throw ParameterError("model requires n >= 1");
    if (T < 1) throw ParameterError("model requires T >= 1");
    if (m < 0 || l < 0) throw ParameterError("model dimensions must be nonnegative");
    A.validate(T, n, n, "A");
    if (m > 0) {
      if (!B) throw DimensionError("model has m > 0 but no B schedule");
      B->validate(T, n, m, "B");
    } else if (B) {
      throw DimensionError("model has a B schedule but m = 0");
    }
    if (H && H->cols() != n)
      throw DimensionError("H must have n = " + std::to_string(n) + " columns");
    if (routing && (routing->rows() != l || routing->cols() != n))
      throw DimensionError("routing matrix must be l x n");
    if (!var_names.empty() && static_cast<int>(var_names.size()) != n)
      throw DimensionError("variable name list must have n entries");
    if (!x0.empty() && static_cast<int>(x0.size()) != n)
      throw DimensionError("x0 must have n entries");
    disturbance.validate(l);
  }

  std::vector<std::string> names() const {
    if (!var_names.empty()) return var_names;
    std::vector<std::string> out;
    out.reserve(n);
    for (int i = 1; i <= n; ++i) out.push_back("x" + std::to_string(i));
    return out;
  }

  std::vector<double> initial_state() const {
    return x0.empty() ? std::vector<double>(n, 0.0) : x0;
  }

  std::vector<double> observe(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != n)
      throw DimensionError("observe: state must have dimension n");
    if (!H) return std::vector<double>(x.begin(), x.end());
    return H->apply(x);
  }

  // Maps v in R^l into state space: routing matrix when present, identity
  // embedding of the first min(l, n) coordinates otherwise.
  std::vector<double> embed_disturbance(std::span<const double> v) const {
    if (static_cast<int>(v.size()) != l)
      throw DimensionError("disturbance must have dimension l = " + std::to_string(l));
    std::vector<double> out(n, 0.0);
    if (routing) {
      for (const auto& t : routing->to_triplets()) out[t.col] += v[t.row] * t.value;
    } else {
      for (int i = 0; i < std::min(l, n); ++i) out[i] = v[i];
    }
    return out;
  }
};

// One application of the recurrence: x(t+1) = A(t) x + B(t) u + embed(v).
inline std::vector<double> step(const SystemModel& model, std::span<const double> x,
                                std::span<const double> u, std::span<const double> v, int t) {
  if (t < 1 || t > model.T)
    throw RangeError("step t = " + std::to_string(t) + " outside [1, " +
                     std::to_string(model.T) + "]");
  if (static_cast<int>(x.size()) != model.n)
    throw DimensionError("step: x has dimension " + std::to_string(x.size()) +
                         ", A is " + std::to_string(model.n) + "x" + std::to_string(model.n));
  if (static_cast<int>(u.size()) != model.m)
    throw DimensionError("step: u has dimension " + std::to_string(u.size()) +
                         ", B is " + std::to_string(model.n) + "x" + std::to_string(model.m));

  std::vector<double> next = model.A.at(t).apply(x);
  if (model.m > 0) {
    std::vector<double> bu = model.B->at(t).apply(u);
    for (int i = 0; i < model.n; ++i) next[i] += bu[i];
  }
  std::vector<double> ev = model.embed_disturbance(v);
  for (int i = 0; i < model.n; ++i) next[i] += ev[i];
  return next;
}

// Control law: receives the step index and the current observation
// y(t) = H x(t), returns u(t) of dimension m.
using ControlLaw = std::function<std::vector<double>(int t, const std::vector<double>& y)>;

// Runs the recurrence from x0 and records rows x(1) = x0 through x(T).
// Simulation never produces missing cells.
inline Trajectory simulate(const SystemModel& model, std::span<const double> x0,
                           const ControlLaw& control, const DisturbanceSpec& disturbance,
                           std::uint64_t seed) {
  model.validate();
  if (static_cast<int>(x0.size()) != model.n)
    throw DimensionError("simulate: x0 must have dimension n = " + std::to_string(model.n));

  DisturbanceSampler sampler(disturbance, model.l, seed);
  Trajectory traj(model.T, model.n, 1, model.names());

  std::vector<double> x(x0.begin(), x0.end());
  for (int t = 1; t <= model.T; ++t) {
    for (int i = 0; i < model.n; ++i) traj.set(t, i, x[i]);
    if (t == model.T) break;
    std::vector<double> u;
    if (control) {
      u = control(t, model.observe(x));
      if (static_cast<int>(u.size()) != model.m)
        throw DimensionError("control law returned dimension " + std::to_string(u.size()) +
                             " instead of m = " + std::to_string(model.m) + " at step " +
                             std::to_string(t));
    } else {
      u.assign(model.m, 0.0);
    }
    x = step(model, x, u, sampler.at(t), t);
  }
  return traj;
}

inline Trajectory simulate(const SystemModel& model, const ControlLaw& control = {}) {
  return simulate(model, model.initial_state(), control, model.disturbance, model.seed);
}

}  // namespace twinsim
