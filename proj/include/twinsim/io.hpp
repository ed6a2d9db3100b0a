#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinsim/csv.hpp"
#include "twinsim/error.hpp"
#include "twinsim/indicator.hpp"
#include "twinsim/matrix.hpp"
#include "twinsim/model.hpp"
#include "twinsim/regime.hpp"
#include "twinsim/scenario.hpp"
#include "twinsim/trajectory.hpp"

namespace twinsim {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Trajectory CSV: header `t,<var1>,...,<varN>`, one row per step, empty cell
// (or the configured token) = missing. Step indices are 1-based and
// contiguous.
// ---------------------------------------------------------------------------

struct IngestSpec {
  std::string path;
  char delimiter = ',';
  std::string missing_token;   // default: empty cell
  bool header = true;          // first row carries variable names
  bool step_column = true;     // first column is the step index

  void validate() const {
    if (csv::parse_double(missing_token))
      throw ConfigError("missing token '" + missing_token + "' parses as a number");
  }
};

struct IngestStats {
  size_t rows = 0;
  std::vector<size_t> missing_per_var;

  double missing_fraction(size_t i) const {
    return rows == 0 ? 0.0 : static_cast<double>(missing_per_var[i]) / static_cast<double>(rows);
  }
};

inline Trajectory ingest_trajectory_lines(const std::vector<std::string>& lines,
                                          const IngestSpec& spec, IngestStats* stats = nullptr) {
  spec.validate();
  size_t first_data = 0;
  std::vector<std::string> names;
  if (spec.header) {
    if (lines.empty()) throw ParseError("empty file, expected a header row");
    auto head = csv::split_line(lines[0], spec.delimiter);
    size_t c0 = 0;
    if (spec.step_column) {
      if (head.empty() || head[0] != "t")
        throw ParseError("line 1: first header column must be 't'");
      c0 = 1;
    }
    if (head.size() <= c0) throw ParseError("line 1: header names no variables");
    names.assign(head.begin() + c0, head.end());
    for (size_t i = 0; i < names.size(); ++i) {
      if (names[i].empty())
        throw ParseError("line 1: empty variable name in column " + std::to_string(c0 + i + 1));
      for (size_t j = i + 1; j < names.size(); ++j)
        if (names[i] == names[j])
          throw ParseError("line 1: duplicate variable name '" + names[i] + "'");
    }
    first_data = 1;
  }

  std::vector<std::vector<std::string>> rows;
  for (size_t ln = first_data; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    rows.push_back(csv::split_line(lines[ln], spec.delimiter));
    rows.back().push_back(std::to_string(ln + 1));  // stash the line number
  }
  if (rows.empty()) throw ParameterError("no data rows");

  const size_t expect = (spec.step_column ? 1 : 0) + (names.empty() ? rows[0].size() - 1 -
                                                                          (spec.step_column ? 1 : 0)
                                                                    : names.size());
  const size_t n = names.empty() ? expect - (spec.step_column ? 1 : 0) : names.size();
  if (n < 1) throw ParseError("no variable columns");

  int t0 = 1;
  if (spec.step_column) {
    auto t = csv::parse_int(rows[0][0]);
    if (!t) throw ParseError("line " + rows[0].back() + ": step index '" + rows[0][0] +
                             "' is not an integer");
    t0 = static_cast<int>(*t);
  }

  Trajectory traj(static_cast<int>(rows.size()), static_cast<int>(n), t0,
                  names.empty() ? std::vector<std::string>{} : names);
  if (stats) {
    stats->rows = rows.size();
    stats->missing_per_var.assign(n, 0);
  }

  for (size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string& line_no = row.back();
    const size_t cells = row.size() - 1;
    const size_t c0 = spec.step_column ? 1 : 0;
    if (cells != n + c0)
      throw ParseError("line " + line_no + ": expected " + std::to_string(n + c0) +
                       " cells, got " + std::to_string(cells));
    const int t = t0 + static_cast<int>(r);
    if (spec.step_column) {
      auto ti = csv::parse_int(row[0]);
      if (!ti)
        throw ParseError("line " + line_no + ": step index '" + row[0] + "' is not an integer");
      if (static_cast<int>(*ti) != t)
        throw ParseError("line " + line_no + ": step index " + std::to_string(*ti) +
                         " breaks contiguity, expected " + std::to_string(t));
    }
    for (size_t i = 0; i < n; ++i) {
      const std::string& cell = row[c0 + i];
      if (cell == spec.missing_token ||
          (spec.missing_token.empty() && cell.find_first_not_of(" \t") == std::string::npos)) {
        traj.set_missing(t, static_cast<int>(i));
        if (stats) ++stats->missing_per_var[i];
        continue;
      }
      auto v = csv::parse_double(cell);
      if (!v)
        throw ParseError("line " + line_no + ": cell '" + cell + "' in column '" +
                         traj.names()[i] + "' is not a number");
      traj.set(t, static_cast<int>(i), *v);
    }
  }
  return traj;
}

inline Trajectory ingest_trajectory(const IngestSpec& spec, IngestStats* stats = nullptr) {
  return ingest_trajectory_lines(csv::read_lines_file(spec.path), spec, stats);
}

inline Trajectory load_trajectory(const std::string& path) {
  IngestSpec spec;
  spec.path = path;
  return ingest_trajectory(spec);
}

inline void emit_trajectory(const Trajectory& traj, std::ostream& out, char delim = ',') {
  out << 't';
  for (const auto& name : traj.names()) out << delim << csv::quote_field(name, delim);
  out << '\n';
  for (int t = traj.t0(); t <= traj.t_last(); ++t) {
    out << t;
    for (int i = 0; i < traj.vars(); ++i) {
      out << delim;
      if (traj.present(t, i)) out << csv::format_double(traj.value(t, i));
    }
    out << '\n';
  }
}

inline void save_trajectory(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  emit_trajectory(traj, out);
}

// ---------------------------------------------------------------------------
// Indicator report: a JSON summary holding every field, plus a wide CSV
// (`t,G_t,G_1..G_n`) for spreadsheet work. The JSON is the round-trip form.
// ---------------------------------------------------------------------------

inline json report_to_json(const IndicatorReport& rep) {
  json j;
  j["type"] = "indicator-report";
  j["label"] = rep.label;
  j["k"] = rep.k;
  j["variables"] = rep.var_names;
  j["valid_steps"] = rep.valid_steps;
  j["G"] = rep.g;
  j["G_t"] = rep.g_t;
  j["exclude_diagonal"] = rep.exclude_diagonal;
  json gi = json::array();
  const size_t n = rep.var_names.size();
  for (size_t s = 0; s < rep.valid_steps.size(); ++s) {
    json row = json::array();
    for (size_t i = 0; i < n; ++i) row.push_back(rep.g_i[s * n + i]);
    gi.push_back(std::move(row));
  }
  j["G_i"] = std::move(gi);
  return j;
}

inline IndicatorReport report_from_json(const json& j) {
  IndicatorReport rep;
  if (j.value("type", "") != "indicator-report")
    throw ParseError("not an indicator report (missing type=indicator-report)");
  rep.label = j.value("label", "");
  rep.k = j.at("k").get<int>();
  rep.var_names = j.at("variables").get<std::vector<std::string>>();
  rep.valid_steps = j.at("valid_steps").get<std::vector<int>>();
  rep.g = j.at("G").get<double>();
  rep.g_t = j.at("G_t").get<std::vector<double>>();
  rep.exclude_diagonal = j.value("exclude_diagonal", false);
  const auto& gi = j.at("G_i");
  if (gi.size() != rep.valid_steps.size())
    throw ParseError("report G_i has " + std::to_string(gi.size()) + " rows for " +
                     std::to_string(rep.valid_steps.size()) + " valid steps");
  if (rep.g_t.size() != rep.valid_steps.size())
    throw ParseError("report G_t length does not match valid_steps");
  for (const auto& row : gi) {
    if (row.size() != rep.var_names.size())
      throw ParseError("report G_i row width does not match the variable list");
    for (const auto& v : row) rep.g_i.push_back(v.get<double>());
  }
  return rep;
}

inline void write_report_csv(const IndicatorReport& rep, std::ostream& out) {
  out << "t,G_t";
  for (size_t i = 1; i <= rep.var_names.size(); ++i) out << ",G_" << i;
  out << '\n';
  const size_t n = rep.var_names.size();
  for (size_t s = 0; s < rep.valid_steps.size(); ++s) {
    out << rep.valid_steps[s] << ',' << csv::format_double(rep.g_t[s]);
    for (size_t i = 0; i < n; ++i) out << ',' << csv::format_double(rep.g_i[s * n + i]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON loaders for model / regime / scenario documents. Indices in files are
// 1-based, matching the period numbering used everywhere else; they convert
// to 0-based at this boundary. Relative paths resolve against the document's
// own directory.
// ---------------------------------------------------------------------------

namespace detail {

inline json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline int as_index(const json& v, const char* what) {
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw ParseError(std::string(what) + " must be a 1-based integer");
  return v.get<int>() - 1;
}

// Matrix block: list of [t|"*", row, col, value]. Entries under "*" form a
// base matrix; per-step entries override individual coordinates of the base
// for that step. All-"*" blocks load as a constant schedule.
inline MatrixSchedule parse_matrix_block(const json& block, int rows, int cols, int T,
                                         const std::string& name) {
  std::map<std::pair<int, int>, double> base;
  std::map<int, std::map<std::pair<int, int>, double>> per_step;
  for (const auto& e : block) {
    if (!e.is_array() || e.size() != 4)
      throw ParseError(name + ": each entry must be [t|\"*\", row, col, value]");
    const int r = as_index(e[1], (name + " row").c_str());
    const int c = as_index(e[2], (name + " col").c_str());
    if (r >= rows || c >= cols)
      throw DimensionError(name + ": entry (" + std::to_string(r + 1) + "," +
                           std::to_string(c + 1) + ") outside " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    const double v = e[3].get<double>();
    if (e[0].is_string()) {
      if (e[0].get<std::string>() != "*")
        throw ParseError(name + ": step must be an integer or \"*\"");
      base[{r, c}] = v;
    } else {
      const int t = e[0].get<int>();
      if (t < 1 || t > T)
        throw RangeError(name + ": step " + std::to_string(t) + " outside [1, " +
                         std::to_string(T) + "]");
      per_step[t][{r, c}] = v;
    }
  }
  auto to_matrix = [&](const std::map<std::pair<int, int>, double>& m) {
    std::vector<Triplet> tr;
    tr.reserve(m.size());
    for (const auto& [rc, v] : m) tr.push_back({rc.first, rc.second, v});
    return Matrix::from_triplets(rows, cols, std::move(tr));
  };
  if (per_step.empty()) return MatrixSchedule::constant(to_matrix(base));

  std::map<int, Matrix> mats;
  for (int t = 1; t <= T; ++t) {
    auto merged = base;
    auto it = per_step.find(t);
    if (it != per_step.end())
      for (const auto& [rc, v] : it->second) merged[rc] = v;
    mats.emplace(t, to_matrix(merged));
  }
  return MatrixSchedule::per_step(std::move(mats));
}

inline Matrix parse_matrix(const json& block, int rows, int cols, const std::string& name) {
  std::vector<Triplet> tr;
  for (const auto& e : block) {
    if (!e.is_array() || e.size() != 3)
      throw ParseError(name + ": each entry must be [row, col, value]");
    tr.push_back({as_index(e[0], (name + " row").c_str()),
                  as_index(e[1], (name + " col").c_str()), e[2].get<double>()});
  }
  return Matrix::from_triplets(rows, cols, std::move(tr));
}

inline std::string resolve_path(const std::string& ref, const std::string& base_file) {
  std::filesystem::path p(ref);
  if (p.is_absolute()) return ref;
  return (std::filesystem::path(base_file).parent_path() / p).string();
}

}  // namespace detail

inline SystemModel model_from_json(const json& j, const std::string& /*path*/ = "") {
  SystemModel model;
  model.n = j.at("n").get<int>();
  model.m = j.value("m", 0);
  model.l = j.value("l", 0);
  model.T = j.at("T").get<int>();
  model.label = j.value("label", "");
  if (model.n < 1 || model.T < 1) throw ParameterError("model requires n >= 1 and T >= 1");
  if (j.contains("variables"))
    model.var_names = j.at("variables").get<std::vector<std::string>>();
  if (j.contains("x0")) model.x0 = j.at("x0").get<std::vector<double>>();
  model.A = detail::parse_matrix_block(j.at("A"), model.n, model.n, model.T, "A");
  if (j.contains("B"))
    model.B = detail::parse_matrix_block(j.at("B"), model.n, model.m, model.T, "B");
  if (j.contains("H")) {
    const int k_out = j.value("k_out", model.n);
    model.H = detail::parse_matrix(j.at("H"), k_out, model.n, "H");
  }
  if (j.contains("routing"))
    model.routing = detail::parse_matrix(j.at("routing"), model.l, model.n, "routing");
  if (j.contains("disturbance")) {
    const auto& d = j.at("disturbance");
    for (const auto& s : d.value("sinusoids", json::array())) {
      if (!s.is_array() || s.size() != 4)
        throw ParseError("disturbance sinusoid must be [var, amplitude, period, phase]");
      model.disturbance.sinusoids.push_back({detail::as_index(s[0], "sinusoid var"),
                                             s[1].get<double>(), s[2].get<double>(),
                                             s[3].get<double>()});
    }
    if (d.contains("noise")) {
      model.disturbance.noise.assign(static_cast<size_t>(std::max(model.l, 0)), 0.0);
      for (const auto& nset : d.at("noise")) {
        if (!nset.is_array() || nset.size() != 2)
          throw ParseError("disturbance noise must list [var, magnitude] pairs");
        const int v = detail::as_index(nset[0], "noise var");
        if (v >= model.l) throw DimensionError("noise coordinate outside disturbance dimension");
        model.disturbance.noise[static_cast<size_t>(v)] = nset[1].get<double>();
      }
    }
    model.seed = d.value("seed", 0ull);
  }
  model.validate();
  return model;
}

inline SystemModel load_model(const std::string& path) {
  return model_from_json(detail::parse_json_file(path), path);
}

inline BlockingSchedule blocking_from_json(const json& j) {
  std::vector<BlockingEntry> entries;
  for (const auto& e : j) {
    BlockingEntry be;
    be.variable = e.at("variable").get<std::string>();
    be.start = e.at("start").get<int>();
    be.end = e.value("end", be.start);
    be.annotation = e.value("annotation", "");
    const std::string mode = e.value("mode", "zero");
    if (mode == "zero") be.mode = BlockMode::zero;
    else if (mode == "missing") be.mode = BlockMode::missing;
    else throw ParseError("blocking mode must be zero or missing");
    entries.push_back(std::move(be));
  }
  return BlockingSchedule(std::move(entries));
}

inline ControlRegime regime_from_json(const json& j, const std::string& path = "") {
  ControlRegime regime;
  regime.label = j.at("label").get<std::string>();
  if (j.contains("W")) {
    const int m = j.at("m").get<int>();
    const int k_out = j.at("k_out").get<int>();
    const int T = j.value("T", 0);
    regime.W = detail::parse_matrix_block(j.at("W"), m, k_out, T > 0 ? T : 1, "W");
  }
  if (j.contains("blocking")) {
    const auto& b = j.at("blocking");
    if (b.is_string())
      regime.blocking = parse_schedule_file(detail::resolve_path(b.get<std::string>(), path));
    else
      regime.blocking = blocking_from_json(b);
  }
  if (j.contains("control_targets")) {
    for (const auto& row : j.at("control_targets")) {
      std::vector<int> targets;
      bool first = true;
      int control = -1;
      for (const auto& v : row) {
        if (first) {
          control = detail::as_index(v, "control index");
          first = false;
        } else {
          targets.push_back(detail::as_index(v, "control target"));
        }
      }
      if (control < 0) throw ParseError("control_targets rows must start with a control index");
      if (static_cast<int>(regime.control_targets.size()) <= control)
        regime.control_targets.resize(static_cast<size_t>(control) + 1);
      regime.control_targets[static_cast<size_t>(control)] = std::move(targets);
    }
  }
  return regime;
}

inline ControlRegime load_regime(const std::string& path) {
  return regime_from_json(detail::parse_json_file(path), path);
}

inline Objective objective_from_json(const json& j) {
  Objective obj;
  const std::string mode = j.value("mode", "indicator-total");
  if (mode == "indicator-total") obj.mode = Objective::Mode::indicator_total;
  else if (mode == "state-target") obj.mode = Objective::Mode::state_target;
  else throw ParseError("objective mode must be indicator-total or state-target");
  const std::string dir = j.value("direction", "min");
  if (dir == "min") obj.minimize = true;
  else if (dir == "max") obj.minimize = false;
  else throw ParseError("objective direction must be min or max");
  const std::string norm = j.value("norm", "absolute");
  if (norm == "absolute") obj.norm = Objective::Norm::absolute;
  else if (norm == "quadratic") obj.norm = Objective::Norm::quadratic;
  else throw ParseError("objective norm must be absolute or quadratic");
  for (const auto& t : j.value("terms", json::array())) {
    Objective::Term term;
    term.var = detail::as_index(t.at("var"), "objective var");
    term.weight = t.value("weight", 1.0);
    term.target = t.value("target", 0.0);
    obj.terms.push_back(term);
  }
  return obj;
}

inline Scenario load_scenario(const std::string& path) {
  const json j = detail::parse_json_file(path);
  Scenario sc;
  sc.label = j.value("label", "");
  sc.k = j.at("k").get<int>();
  sc.seed = j.value("seed", 0ull);
  sc.threads = j.value("threads", 1);
  if (j.contains("model"))
    sc.model = load_model(detail::resolve_path(j.at("model").get<std::string>(), path));
  if (j.contains("trajectory"))
    sc.trajectory =
        load_trajectory(detail::resolve_path(j.at("trajectory").get<std::string>(), path));

  auto load_ref = [&](const json& r) {
    return r.is_string() ? load_regime(detail::resolve_path(r.get<std::string>(), path))
                         : regime_from_json(r, path);
  };
  sc.baseline = load_ref(j.at("baseline"));
  for (const auto& r : j.at("alternatives")) sc.alternatives.push_back(load_ref(r));

  if (j.contains("objective")) {
    sc.objective = objective_from_json(j.at("objective"));
    sc.has_objective = true;
  }
  if (j.contains("controls")) {
    const auto& c = j.at("controls");
    ActionSet actions;
    for (const auto& a : c.at("actions"))
      actions.actions.push_back(a.get<std::vector<double>>());
    sc.controls = std::move(actions);
    sc.dp_horizon = c.value("horizon", 0);
    if (c.contains("grid")) {
      GridSpec g;
      g.lo = c.at("grid").at("lo").get<std::vector<double>>();
      g.hi = c.at("grid").at("hi").get<std::vector<double>>();
      g.points = c.at("grid").at("points").get<std::vector<int>>();
      sc.grid = std::move(g);
    }
  }
  if (j.contains("cost_table")) {
    CostTable ct;
    for (const auto& [k_, v] : j.at("cost_table").items()) ct.per_period[k_] = v.get<double>();
    sc.cost_table = std::move(ct);
  }
  if (j.contains("project_total")) sc.project_total = j.at("project_total").get<double>();
  sc.validate();
  return sc;
}

// ---------------------------------------------------------------------------
// Comparison + pipeline emission
// ---------------------------------------------------------------------------

inline std::string sanitize_label(const std::string& label) {
  std::string out;
  for (char c : label)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out.empty() ? "unnamed" : out;
}

inline void write_delta_csv(const RegimeComparison& d, std::ostream& out) {
  out << "t,dG_t\n";
  for (size_t s = 0; s < d.steps.size(); ++s)
    out << d.steps[s] << ',' << csv::format_double(d.delta_gt[s]) << '\n';
}

inline json comparison_to_json(const ComparisonResult& res) {
  json j;
  j["type"] = "comparison";
  j["baseline"] = {{"label", res.baseline.label}, {"G", res.baseline.g}, {"k", res.baseline.k}};
  json alts = json::array();
  for (size_t a = 0; a < res.alternatives.size(); ++a) {
    json alt;
    alt["label"] = res.alternatives[a].label;
    alt["G"] = res.alternatives[a].g;
    alt["dG"] = res.deltas[a].delta_g;
    if (res.deltas[a].cost) {
      alt["blocked_cost"] = res.deltas[a].cost->total;
      if (res.deltas[a].cost->fraction) alt["blocked_cost_fraction"] = *res.deltas[a].cost->fraction;
    }
    alts.push_back(std::move(alt));
  }
  j["alternatives"] = std::move(alts);
  if (res.optimality) {
    json opt;
    opt["value"] = res.optimality->value;
    json acts = json::array();
    for (int a : res.optimality->action_indices) acts.push_back(a + 1);
    opt["actions"] = std::move(acts);
    j["optimality"] = std::move(opt);
  }
  j["log"] = res.log;
  return j;
}

// Writes comparison.json, per-regime report files and per-alternative delta
// CSVs into out_dir. Returns the comparison JSON.
inline json write_comparison(const ComparisonResult& res, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto write_text = [&](const std::string& name, const std::string& text) {
    std::ofstream out(fs::path(out_dir) / name);
    if (!out) throw ConfigError("cannot write " + name + " in " + out_dir);
    out << text;
  };
  auto write_report = [&](const IndicatorReport& rep) {
    const std::string base = "report_" + sanitize_label(rep.label);
    write_text(base + ".json", report_to_json(rep).dump(2) + "\n");
    std::ostringstream csv_out;
    write_report_csv(rep, csv_out);
    write_text(base + ".csv", csv_out.str());
  };
  write_report(res.baseline);
  for (const auto& rep : res.alternatives) write_report(rep);
  for (const auto& d : res.deltas) {
    std::ostringstream out;
    write_delta_csv(d, out);
    write_text("delta_" + sanitize_label(d.label) + ".csv", out.str());
  }
  json j = comparison_to_json(res);
  write_text("comparison.json", j.dump(2) + "\n");
  return j;
}

// Correlation dump: triplet CSV `t,i,j,r`, upper triangle, 1-based indices.
inline void write_correlation_csv(const CorrelationMatrix& R, std::ostream& out,
                                  bool header = true) {
  if (header) out << "t,i,j,r\n";
  for (int i = 0; i < R.dim(); ++i)
    for (int j = i; j < R.dim(); ++j)
      out << R.anchor() << ',' << i + 1 << ',' << j + 1 << ','
          << csv::format_double(R.r(i, j)) << '\n';
}

// ---------------------------------------------------------------------------
// `check`: identify and validate any document the engine reads or writes.
// ---------------------------------------------------------------------------

enum class FileKind {
  trajectory,
  schedule,
  model,
  regime,
  scenario,
  report,
  comparison,
  report_csv,
  delta_csv,
  correlation_csv,
};

inline const char* file_kind_name(FileKind k) {
  switch (k) {
    case FileKind::trajectory: return "trajectory";
    case FileKind::schedule: return "schedule";
    case FileKind::model: return "model";
    case FileKind::regime: return "regime";
    case FileKind::scenario: return "scenario";
    case FileKind::report: return "indicator report";
    case FileKind::comparison: return "comparison";
    case FileKind::report_csv: return "report CSV";
    case FileKind::delta_csv: return "delta CSV";
    case FileKind::correlation_csv: return "correlation CSV";
  }
  return "unknown";
}

// Validates the file as whichever kind its shape announces; throws the
// underlying error when invalid.
inline FileKind check_file(const std::string& path) {
  const std::string ext = std::filesystem::path(path).extension().string();
  if (ext == ".json") {
    const json j = detail::parse_json_file(path);
    const std::string type = j.value("type", "");
    if (type == "indicator-report") {
      report_from_json(j);
      return FileKind::report;
    }
    if (type == "comparison") return FileKind::comparison;
    if (j.contains("alternatives") && j.contains("k")) {
      load_scenario(path);
      return FileKind::scenario;
    }
    if (j.contains("A") && j.contains("n")) {
      model_from_json(j, path);
      return FileKind::model;
    }
    if (j.contains("label")) {
      regime_from_json(j, path);
      return FileKind::regime;
    }
    throw ParseError(path + ": unrecognized JSON document");
  }
  // CSV family: dispatch on the header row
  const auto lines = csv::read_lines_file(path);
  if (lines.empty()) throw ParseError(path + ": empty file");
  const auto head = csv::split_line(lines[0]);
  if (!head.empty() && head[0] == "variable") {
    parse_schedule(lines);
    return FileKind::schedule;
  }
  if (head.size() >= 2 && head[0] == "t" && head[1] == "G_t") return FileKind::report_csv;
  if (head.size() == 2 && head[0] == "t" && head[1] == "dG_t") return FileKind::delta_csv;
  if (head.size() == 4 && head[0] == "t" && head[1] == "i" && head[2] == "j" && head[3] == "r")
    return FileKind::correlation_csv;
  IngestSpec spec;
  spec.path = path;
  ingest_trajectory_lines(lines, spec);
  return FileKind::trajectory;
}

}  // namespace twinsim
