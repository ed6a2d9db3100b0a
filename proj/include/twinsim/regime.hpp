#pragma once

#include <algorithm>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "twinsim/csv.hpp"
#include "twinsim/error.hpp"
#include "twinsim/matrix.hpp"
#include "twinsim/trajectory.hpp"

namespace twinsim {

enum class BlockMode {
  zero,     // the duty is not performed: the cell reads 0
  missing,  // the cell drops out of the correlation entirely
};

struct BlockingEntry {
  std::string variable;
  int start = 1;  // inclusive period range, 1-based
  int end = 1;
  std::string annotation;
  BlockMode mode = BlockMode::zero;

  friend bool operator==(const BlockingEntry&, const BlockingEntry&) = default;
};

// Set of (variable, period range) stoppages. Stored canonically: sorted by
// (variable, mode, start) with overlapping or adjacent ranges of the same
// variable and mode merged. Where zero and missing ranges overlap, missing
// wins (it is applied last).
class BlockingSchedule {
public:
  BlockingSchedule() = default;

  explicit BlockingSchedule(std::vector<BlockingEntry> entries) {
    for (const auto& e : entries) {
      if (e.variable.empty()) throw ParseError("blocking entry without a variable");
      if (e.start < 1 || e.start > e.end)
        throw ParseError("blocking range [" + std::to_string(e.start) + ", " +
                         std::to_string(e.end) + "] for '" + e.variable +
                         "' is not 1 <= start <= end");
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const BlockingEntry& a, const BlockingEntry& b) {
                       if (a.variable != b.variable) return a.variable < b.variable;
                       if (a.mode != b.mode) return a.mode < b.mode;
                       return a.start < b.start;
                     });
    for (const auto& e : entries) {
      if (!entries_.empty()) {
        BlockingEntry& last = entries_.back();
        if (last.variable == e.variable && last.mode == e.mode && e.start <= last.end + 1) {
          last.end = std::max(last.end, e.end);
          if (!e.annotation.empty() && e.annotation != last.annotation) {
            if (!last.annotation.empty()) last.annotation += "; ";
            last.annotation += e.annotation;
          }
          continue;
        }
      }
      entries_.push_back(e);
    }
  }

  const std::vector<BlockingEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  BlockingSchedule merged_with(const BlockingSchedule& other) const {
    std::vector<BlockingEntry> all = entries_;
    all.insert(all.end(), other.entries_.begin(), other.entries_.end());
    return BlockingSchedule(std::move(all));
  }

  bool blocks(const std::string& variable, int t) const {
    for (const auto& e : entries_)
      if (e.variable == variable && e.start <= t && t <= e.end) return true;
    return false;
  }

  // Total number of blocked (variable, period) cells; ranges are canonical,
  // so this is exact.
  long blocked_cells() const {
    long c = 0;
    for (const auto& e : entries_) c += e.end - e.start + 1;
    return c;
  }

  friend bool operator==(const BlockingSchedule&, const BlockingSchedule&) = default;

private:
  std::vector<BlockingEntry> entries_;
};

// Returns a copy with every scheduled (variable, step) cell blocked. Cells
// outside the schedule are untouched. Unresolvable variable names are
// collected and reported together.
inline Trajectory apply_blocking(const Trajectory& traj, const BlockingSchedule& schedule) {
  std::string unknown;
  for (const auto& e : schedule.entries()) {
    if (traj.index_of(e.variable) < 0) {
      if (!unknown.empty()) unknown += ", ";
      unknown += e.variable;
    }
  }
  if (!unknown.empty())
    throw ConfigError("blocking schedule names unknown variables: " + unknown);

  Trajectory out = traj;
  for (const auto& e : schedule.entries()) {
    const int i = out.index_of(e.variable);
    const int a = std::max(e.start, out.t0());
    const int b = std::min(e.end, out.t_last());
    for (int t = a; t <= b; ++t) {
      if (e.mode == BlockMode::zero)
        out.set(t, i, 0.0);
      else
        out.set_missing(t, i);
    }
  }
  return out;
}

// A named control structure: the matrix schedule W realizing u(t) = W(t) y(t)
// plus a variable-blocking schedule. control_targets[r] lists the state
// variables control coordinate r drives (derived from the sparsity of B when
// the regime is used against a model); a control whose targets are all
// blocked at t is forced to zero.
struct ControlRegime {
  std::string label;
  std::optional<MatrixSchedule> W;  // m x k_out per step
  BlockingSchedule blocking;
  std::vector<std::vector<int>> control_targets;  // may be empty = unknown
};

// u(t) = W(t) y(t) with blocked control rows zeroed. var_names resolves the
// blocking schedule onto target variable indices; without W the control is
// identically zero of the given dimension m.
inline std::vector<double> apply_control(const ControlRegime& regime, int t,
                                         std::span<const double> y,
                                         const std::vector<std::string>& var_names = {},
                                         int m_hint = -1) {
  std::vector<double> u;
  if (regime.W) {
    const Matrix& W = regime.W->at(t);
    if (static_cast<int>(y.size()) != W.cols())
      throw DimensionError("apply_control: y has dimension " + std::to_string(y.size()) +
                           ", W(t) is " + std::to_string(W.rows()) + "x" +
                           std::to_string(W.cols()));
    u = W.apply(y);
  } else {
    u.assign(m_hint >= 0 ? m_hint : y.size(), 0.0);
  }
  if (!regime.blocking.empty() && !regime.control_targets.empty() && !var_names.empty()) {
    for (size_t r = 0; r < u.size() && r < regime.control_targets.size(); ++r) {
      const auto& targets = regime.control_targets[r];
      if (targets.empty()) continue;
      bool all_blocked = true;
      for (int var : targets) {
        if (var < 0 || var >= static_cast<int>(var_names.size()) ||
            !regime.blocking.blocks(var_names[var], t)) {
          all_blocked = false;
          break;
        }
      }
      if (all_blocked) u[r] = 0.0;
    }
  }
  return u;
}

namespace detail {

// Accepts "a - b", "a-b" or "a"; returns the inclusive range.
inline std::pair<int, int> parse_period_token(std::string_view tok, size_t line_no) {
  auto fail = [&](const std::string& why) -> std::pair<int, int> {
    throw ParseError("line " + std::to_string(line_no) + ": bad period '" +
                     std::string(tok) + "': " + why);
  };
  // a leading '-' would be a negative period, not a range separator
  size_t dash = tok.find('-', 1);
  if (dash == std::string_view::npos) {
    auto v = csv::parse_int(tok);
    if (!v) return fail("not an integer");
    return {static_cast<int>(*v), static_cast<int>(*v)};
  }
  auto a = csv::parse_int(tok.substr(0, dash));
  auto b = csv::parse_int(tok.substr(dash + 1));
  if (!a || !b) return fail("not an integer range");
  if (*a > *b) return fail("start exceeds end");
  return {static_cast<int>(*a), static_cast<int>(*b)};
}

}  // namespace detail

// Schedule CSV: header `variable,start,end,annotation[,mode]`. The start
// field also accepts a combined period list ("1 - 20, 25, 38" etc.), in
// which case end must be empty. mode is `zero` (default) or `missing`.
inline BlockingSchedule parse_schedule(const std::vector<std::string>& lines) {
  if (lines.empty()) throw ParseError("schedule file is empty");
  const auto header = csv::split_line(lines[0]);
  const std::vector<std::string> want = {"variable", "start", "end", "annotation", "mode"};
  if (header.size() < 3 || header.size() > 5)
    throw ParseError("line 1: schedule header must be variable,start,end[,annotation[,mode]]");
  for (size_t c = 0; c < header.size(); ++c)
    if (header[c] != want[c])
      throw ParseError("line 1: unknown column '" + header[c] + "', expected '" + want[c] + "'");

  std::vector<BlockingEntry> entries;
  for (size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    auto fields = csv::split_line(lines[ln]);
    if (fields.size() < 2 || fields.size() > header.size())
      throw ParseError("line " + std::to_string(ln + 1) + ": expected up to " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    fields.resize(header.size());
    BlockingEntry proto;
    proto.variable = fields[0];
    if (proto.variable.empty())
      throw ParseError("line " + std::to_string(ln + 1) + ": empty variable name");
    proto.annotation = header.size() > 3 ? fields[3] : "";
    if (header.size() > 4 && !fields[4].empty()) {
      if (fields[4] == "zero") proto.mode = BlockMode::zero;
      else if (fields[4] == "missing") proto.mode = BlockMode::missing;
      else throw ParseError("line " + std::to_string(ln + 1) + ": mode must be zero or missing");
    }

    const std::string& start = fields[1];
    const std::string& end = fields[2];
    const bool combined = start.find(',') != std::string::npos ||
                          start.find('-', 1) != std::string::npos;
    if (combined) {
      if (!end.empty() && end.find_first_not_of(" \t") != std::string::npos)
        throw ParseError("line " + std::to_string(ln + 1) +
                         ": end must be empty when start lists periods");
      size_t pos = 0;
      while (pos <= start.size()) {
        size_t comma = start.find(',', pos);
        std::string_view tok(start.data() + pos,
                             (comma == std::string::npos ? start.size() : comma) - pos);
        auto [a, b] = detail::parse_period_token(tok, ln + 1);
        BlockingEntry e = proto;
        e.start = a;
        e.end = b;
        entries.push_back(std::move(e));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    } else {
      auto a = csv::parse_int(start);
      if (!a)
        throw ParseError("line " + std::to_string(ln + 1) + ": start '" + start +
                         "' is not an integer");
      std::optional<long long> b = a;
      if (!end.empty() && end.find_first_not_of(" \t") != std::string::npos) {
        b = csv::parse_int(end);
        if (!b)
          throw ParseError("line " + std::to_string(ln + 1) + ": end '" + end +
                           "' is not an integer");
      }
      if (*a > *b)
        throw ParseError("line " + std::to_string(ln + 1) + ": start " + std::to_string(*a) +
                         " exceeds end " + std::to_string(*b));
      BlockingEntry e = proto;
      e.start = static_cast<int>(*a);
      e.end = static_cast<int>(*b);
      entries.push_back(std::move(e));
    }
  }
  try {
    return BlockingSchedule(std::move(entries));
  } catch (const ParseError& e) {
    throw ParseError(std::string("schedule: ") + e.what());
  }
}

inline BlockingSchedule parse_schedule_file(const std::string& path) {
  return parse_schedule(csv::read_lines_file(path));
}

// Canonical emission; the mode column appears only when some entry needs it.
inline void emit_schedule(const BlockingSchedule& schedule, std::ostream& out) {
  bool any_mode = false;
  for (const auto& e : schedule.entries())
    if (e.mode != BlockMode::zero) any_mode = true;
  out << (any_mode ? "variable,start,end,annotation,mode" : "variable,start,end,annotation")
      << "\n";
  for (const auto& e : schedule.entries()) {
    out << csv::quote_field(e.variable) << ',' << e.start << ',' << e.end << ','
        << csv::quote_field(e.annotation);
    if (any_mode) out << ',' << (e.mode == BlockMode::zero ? "zero" : "missing");
    out << "\n";
  }
}

}  // namespace twinsim
