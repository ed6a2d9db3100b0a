#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "twinsim/csv.hpp"
#include "twinsim/error.hpp"
#include "twinsim/indicator.hpp"
#include "twinsim/model.hpp"
#include "twinsim/optimality.hpp"
#include "twinsim/regime.hpp"
#include "twinsim/rolling.hpp"
#include "twinsim/trajectory.hpp"

namespace twinsim {

struct CostTable {
  std::map<std::string, double> per_period;  // variable -> cost per blocked period
};

struct CostEstimate {
  double total = 0.0;
  std::optional<double> fraction;  // of a supplied project total

  friend bool operator==(const CostEstimate&, const CostEstimate&) = default;
};

// Restoration cost of everything the schedule stops: period count times the
// per-period cost, summed over the canonical merged entries. Invariant
// under entry reordering and overlap splitting because the schedule
// canonicalizes first.
inline CostEstimate estimate_blocked_cost(const BlockingSchedule& schedule,
                                          const CostTable& costs,
                                          std::optional<double> project_total = {}) {
  std::string missing;
  for (const auto& e : schedule.entries()) {
    if (!costs.per_period.count(e.variable)) {
      if (missing.find("'" + e.variable + "'") != std::string::npos) continue;
      if (!missing.empty()) missing += ", ";
      missing += "'" + e.variable + "'";
    }
  }
  if (!missing.empty())
    throw ConfigError("cost table has no entry for: " + missing);

  KahanSum<double> total;
  for (const auto& e : schedule.entries())
    total.add(static_cast<double>(e.end - e.start + 1) * costs.per_period.at(e.variable));
  CostEstimate est;
  est.total = total.value();
  if (project_total) {
    if (!(*project_total > 0.0)) throw ParameterError("project total must be > 0");
    est.fraction = est.total / *project_total;
  }
  return est;
}

// Delta of one alternative against the baseline.
struct RegimeComparison {
  std::string label;
  double delta_g = 0.0;                // G_alt - G_base, exact difference of report fields
  std::vector<int> steps;              // common valid steps
  std::vector<double> delta_gt;        // per-step G_t deltas over those steps
  std::optional<CostEstimate> cost;

  friend bool operator==(const RegimeComparison&, const RegimeComparison&) = default;
};

struct ComparisonResult {
  IndicatorReport baseline;
  std::vector<IndicatorReport> alternatives;
  std::vector<RegimeComparison> deltas;
  std::optional<OptimalityResult> optimality;
  std::vector<std::string> log;  // machine-readable pipeline trace, "key=value ..." lines
};

// Compares two indicator reports. Negative delta means the alternative
// regime lowered system connectivity.
inline ComparisonResult compare(const IndicatorReport& base, const IndicatorReport& alt) {
  if (base.k != alt.k)
    throw ComparisonError("reports use different window lengths k = " + std::to_string(base.k) +
                          " and k = " + std::to_string(alt.k));
  if (base.var_names != alt.var_names)
    throw ComparisonError("reports cover different variable universes");

  RegimeComparison d;
  d.label = alt.label;
  d.delta_g = alt.g - base.g;
  std::vector<size_t> bi, ai;
  {
    size_t x = 0, y = 0;
    while (x < base.valid_steps.size() && y < alt.valid_steps.size()) {
      if (base.valid_steps[x] < alt.valid_steps[y]) ++x;
      else if (base.valid_steps[x] > alt.valid_steps[y]) ++y;
      else {
        d.steps.push_back(base.valid_steps[x]);
        d.delta_gt.push_back(alt.g_t[y] - base.g_t[x]);
        ++x;
        ++y;
      }
    }
  }

  ComparisonResult res;
  res.baseline = base;
  res.alternatives.push_back(alt);
  res.deltas.push_back(std::move(d));
  return res;
}

// A full evaluation task: one data source, a baseline regime, and the
// admissible alternatives to rank against it.
struct Scenario {
  std::optional<SystemModel> model;
  std::optional<Trajectory> trajectory;
  ControlRegime baseline;
  std::vector<ControlRegime> alternatives;
  int k = 2;
  Objective objective;
  bool has_objective = false;
  std::optional<ActionSet> controls;  // finite per-step control set for the optimality check
  std::optional<GridSpec> grid;
  int dp_horizon = 0;
  std::optional<CostTable> cost_table;
  std::optional<double> project_total;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string label;

  void validate() const {
    if (model.has_value() == trajectory.has_value())
      throw ParameterError("scenario needs exactly one data source: a model or a trajectory");
    const int T = model ? model->T : trajectory->steps();
    if (k < 2) throw ParameterError("scenario k must be >= 2");
    if (k > T) throw ParameterError("scenario k = " + std::to_string(k) +
                                    " exceeds horizon T = " + std::to_string(T));
    if (model) model->validate();
    if (alternatives.empty()) throw ParameterError("scenario declares no alternative regimes");
    std::vector<std::string> labels{baseline.label};
    for (const auto& r : alternatives) labels.push_back(r.label);
    for (auto& l : labels)
      if (l.empty()) throw ParameterError("every regime needs a nonempty label");
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
      throw ParameterError("regime labels must be unique within a scenario");
  }
};

// Wraps an inner error with the pipeline stage that raised it.
class PipelineStepError : public Error {
public:
  PipelineStepError(const std::string& stage, const Error& cause)
      : Error(stage + ": " + cause.what()) {}
};

namespace detail {

// Control coordinate r targets the state variables with a nonzero B(t)[i][r]
// for any scheduled t.
inline std::vector<std::vector<int>> derive_control_targets(const SystemModel& model) {
  std::vector<std::vector<int>> targets(static_cast<size_t>(std::max(model.m, 0)));
  if (!model.B) return targets;
  std::vector<std::vector<char>> seen(targets.size(), std::vector<char>(model.n, 0));
  for (const auto& [t, mat] : model.B->distinct()) {
    for (const auto& tr : mat->to_triplets()) {
      if (tr.value != 0.0 && !seen[tr.col][tr.row]) {
        seen[tr.col][tr.row] = 1;
        targets[tr.col].push_back(tr.row);
      }
    }
  }
  for (auto& t : targets) std::sort(t.begin(), t.end());
  return targets;
}

inline Trajectory materialize_regime(const Scenario& sc, const ControlRegime& regime,
                                     std::vector<std::string>& log) {
  if (sc.model) {
    const SystemModel& model = *sc.model;
    ControlRegime bound = regime;
    if (bound.control_targets.empty()) bound.control_targets = derive_control_targets(model);
    ControlLaw law;
    if (bound.W) {
      bound.W->validate(model.T, model.m, model.k_out(), "W[" + regime.label + "]");
      const std::vector<std::string> names = model.names();
      law = [&bound, names, m = model.m](int t, const std::vector<double>& y) {
        return apply_control(bound, t, y, names, m);
      };
      log.push_back("step=2 regime=" + regime.label + " branch=simulate control=W");
    } else {
      log.push_back("step=2 regime=" + regime.label + " branch=simulate control=none");
    }
    Trajectory traj = simulate(model, model.initial_state(), law, model.disturbance, sc.seed);
    if (!regime.blocking.empty()) {
      traj = apply_blocking(traj, regime.blocking);
      log.push_back("step=2 regime=" + regime.label + " blocking_entries=" +
                    std::to_string(regime.blocking.entries().size()));
    }
    return traj;
  }
  if (regime.W)
    log.push_back("step=2 regime=" + regime.label +
                  " note=W ignored for an ingested trajectory");
  log.push_back("step=2 regime=" + regime.label + " branch=blocking blocking_entries=" +
                std::to_string(regime.blocking.entries().size()));
  return regime.blocking.empty() ? *sc.trajectory
                                 : apply_blocking(*sc.trajectory, regime.blocking);
}

}  // namespace detail

// The four-stage evaluation: (1) acquire the trajectory source, (2)
// materialize every regime and compute its indicator report, (3) advisory
// optimality check when a finite control set is declared, (4) compare each
// alternative against the baseline. Loop-back decisions are surfaced as
// verdict lines in the log, not automated.
inline ComparisonResult run_pipeline(const Scenario& sc) {
  sc.validate();
  ComparisonResult res;
  auto& log = res.log;

  // step 1: data source
  if (sc.model)
    log.push_back("step=1 source=model n=" + std::to_string(sc.model->n) +
                  " T=" + std::to_string(sc.model->T) + " seed=" + std::to_string(sc.seed));
  else
    log.push_back("step=1 source=trajectory n=" + std::to_string(sc.trajectory->vars()) +
                  " T=" + std::to_string(sc.trajectory->steps()));

  // step 2: materialize regimes and their reports
  IndicatorOptions opts;
  opts.threads = sc.threads;
  auto report_for = [&](const ControlRegime& regime) {
    Trajectory traj = detail::materialize_regime(sc, regime, log);
    IndicatorOptions o = opts;
    o.label = regime.label;
    return integral_indicator(traj, sc.k, o);
  };

  try {
    res.baseline = report_for(sc.baseline);
    for (const auto& alt : sc.alternatives) res.alternatives.push_back(report_for(alt));
  } catch (const PipelineStepError&) {
    throw;
  } catch (const Error& e) {
    throw PipelineStepError("step=2", e);
  }
  log.push_back("step=2 baseline=" + sc.baseline.label + " G=" + std::to_string(res.baseline.g));

  // step 3: optimality check (advisory)
  if (sc.has_objective && sc.controls && sc.grid && sc.model &&
      sc.objective.mode == Objective::Mode::state_target) {
    try {
      res.optimality = check_optimality(*sc.model, sc.objective, *sc.controls,
                                        sc.dp_horizon > 0 ? sc.dp_horizon : sc.model->T,
                                        *sc.grid, sc.model->initial_state());
      log.push_back("step=3 optimality=computed value=" + std::to_string(res.optimality->value));
    } catch (const Error& e) {
      throw PipelineStepError("step=3", e);
    }
  } else {
    log.push_back("step=3 optimality=skipped reason=no finite control set declared");
  }

  // step 4: effectiveness against the baseline
  for (size_t a = 0; a < res.alternatives.size(); ++a) {
    RegimeComparison d;
    try {
      d = compare(res.baseline, res.alternatives[a]).deltas.front();
    } catch (const Error& e) {
      throw PipelineStepError("step=4", e);
    }
    const ControlRegime& regime = sc.alternatives[a];
    if (sc.cost_table && !regime.blocking.empty()) {
      try {
        d.cost = estimate_blocked_cost(regime.blocking, *sc.cost_table, sc.project_total);
      } catch (const Error& e) {
        throw PipelineStepError("step=4", e);
      }
    }
    log.push_back("step=4 alt=" + d.label + " dG=" + csv::format_double(d.delta_g) +
                  " verdict=" +
                  (d.delta_g < 0 ? "connectivity_reduced"
                                 : (d.delta_g > 0 ? "connectivity_increased" : "unchanged")));
    res.deltas.push_back(std::move(d));
  }
  return res;
}

}  // namespace twinsim
