#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "twinsim/error.hpp"

namespace twinsim {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

// Real matrix with either dense row-major storage or a sorted coordinate
// list. Construction from triplets densifies below kDenseLimit because the
// per-entry overhead dominates at small dimensions; large schedules stay
// sparse. Only the products needed by the simulator are provided.
class Matrix {
public:
  static constexpr int kDenseLimit = 64;

  Matrix() = default;

  static Matrix dense(int rows, int cols, std::vector<double> row_major) {
    if (rows < 0 || cols < 0 ||
        row_major.size() != static_cast<size_t>(rows) * static_cast<size_t>(cols))
      throw DimensionError("dense matrix: storage size does not match " +
                           std::to_string(rows) + "x" + std::to_string(cols));
    Matrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.dense_ = std::move(row_major);
    m.is_dense_ = true;
    return m;
  }

  static Matrix zero(int rows, int cols) {
    return dense(rows, cols, std::vector<double>(static_cast<size_t>(rows) * cols, 0.0));
  }

  static Matrix identity(int n) {
    Matrix m = zero(n, n);
    for (int i = 0; i < n; ++i) m.dense_[static_cast<size_t>(i) * n + i] = 1.0;
    return m;
  }

  static Matrix scaled_identity(int n, double s) {
    Matrix m = zero(n, n);
    for (int i = 0; i < n; ++i) m.dense_[static_cast<size_t>(i) * n + i] = s;
    return m;
  }

  // Duplicate coordinates are summed. Entries outside [0, rows) x [0, cols)
  // are rejected.
  static Matrix from_triplets(int rows, int cols, std::vector<Triplet> entries,
                              bool densify_small = true) {
    for (const auto& t : entries) {
      if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
        throw DimensionError("triplet (" + std::to_string(t.row) + "," +
                             std::to_string(t.col) + ") outside " +
                             std::to_string(rows) + "x" + std::to_string(cols));
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<Triplet> merged;
    merged.reserve(entries.size());
    for (const auto& t : entries) {
      if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col)
        merged.back().value += t.value;
      else
        merged.push_back(t);
    }
    if (densify_small && rows < kDenseLimit && cols < kDenseLimit) {
      Matrix m = zero(rows, cols);
      for (const auto& t : merged)
        m.dense_[static_cast<size_t>(t.row) * cols + t.col] = t.value;
      return m;
    }
    Matrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.triplets_ = std::move(merged);
    m.is_dense_ = false;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool is_dense() const { return is_dense_; }

  double at(int r, int c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
      throw RangeError("matrix index out of range");
    if (is_dense_) return dense_[static_cast<size_t>(r) * cols_ + c];
    auto it = std::lower_bound(triplets_.begin(), triplets_.end(), std::pair{r, c},
                               [](const Triplet& t, const std::pair<int, int>& rc) {
                                 return t.row != rc.first ? t.row < rc.first
                                                          : t.col < rc.second;
                               });
    if (it != triplets_.end() && it->row == r && it->col == c) return it->value;
    return 0.0;
  }

  // out = M * x
  void apply(std::span<const double> x, std::span<double> out) const {
    if (static_cast<int>(x.size()) != cols_ || static_cast<int>(out.size()) != rows_)
      throw DimensionError("matrix apply: expected x of size " + std::to_string(cols_) +
                           ", out of size " + std::to_string(rows_));
    if (is_dense_) {
      for (int r = 0; r < rows_; ++r) {
        double acc = 0.0;
        const double* row = dense_.data() + static_cast<size_t>(r) * cols_;
        for (int c = 0; c < cols_; ++c) acc += row[c] * x[c];
        out[r] = acc;
      }
    } else {
      std::fill(out.begin(), out.end(), 0.0);
      for (const auto& t : triplets_) out[t.row] += t.value * x[t.col];
    }
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> out(rows_, 0.0);
    apply(x, out);
    return out;
  }

  std::vector<Triplet> to_triplets() const {
    if (!is_dense_) return triplets_;
    std::vector<Triplet> out;
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) {
        double v = dense_[static_cast<size_t>(r) * cols_ + c];
        if (v != 0.0) out.push_back({r, c, v});
      }
    return out;
  }

  size_t nonzeros() const { return to_triplets().size(); }

private:
  int rows_ = 0;
  int cols_ = 0;
  bool is_dense_ = true;
  std::vector<double> dense_;
  std::vector<Triplet> triplets_;  // sorted by (row, col), duplicates merged
};

// Time-indexed matrix family. Either one constant matrix reused for every
// step or an explicit per-step map that must cover 1..T.
class MatrixSchedule {
public:
  MatrixSchedule() = default;

  static MatrixSchedule constant(Matrix m) {
    MatrixSchedule s;
    s.constant_ = std::move(m);
    s.is_constant_ = true;
    return s;
  }

  static MatrixSchedule per_step(std::map<int, Matrix> by_step) {
    if (by_step.empty()) throw ParameterError("per-step schedule is empty");
    MatrixSchedule s;
    s.by_step_ = std::move(by_step);
    s.is_constant_ = false;
    const Matrix& first = s.by_step_.begin()->second;
    for (const auto& [t, m] : s.by_step_) {
      if (t < 1) throw RangeError("schedule step " + std::to_string(t) + " < 1");
      if (m.rows() != first.rows() || m.cols() != first.cols())
        throw DimensionError("schedule mixes matrix shapes at step " + std::to_string(t));
    }
    return s;
  }

  bool is_constant() const { return is_constant_; }

  int rows() const { return is_constant_ ? constant_.rows() : by_step_.begin()->second.rows(); }
  int cols() const { return is_constant_ ? constant_.cols() : by_step_.begin()->second.cols(); }

  bool covers(int t) const {
    if (t < 1) return false;
    return is_constant_ || by_step_.count(t) > 0;
  }

  const Matrix& at(int t) const {
    if (t < 1) throw RangeError("schedule step " + std::to_string(t) + " < 1");
    if (is_constant_) return constant_;
    auto it = by_step_.find(t);
    if (it == by_step_.end())
      throw RangeError("schedule has no matrix for step " + std::to_string(t));
    return it->second;
  }

  // Checks coverage of 1..T and the expected shape; `name` appears in errors.
  void validate(int T, int rows, int cols, const std::string& name) const {
    if (this->rows() != rows || this->cols() != cols)
      throw DimensionError(name + " must be " + std::to_string(rows) + "x" +
                           std::to_string(cols) + ", got " + std::to_string(this->rows()) +
                           "x" + std::to_string(this->cols()));
    if (!is_constant_) {
      for (int t = 1; t <= T; ++t)
        if (!by_step_.count(t))
          throw RangeError(name + " schedule does not cover step " + std::to_string(t));
    }
  }

  // Distinct matrices (one for constant schedules).
  std::vector<std::pair<int, const Matrix*>> distinct() const {
    std::vector<std::pair<int, const Matrix*>> out;
    if (is_constant_) {
      out.emplace_back(0, &constant_);
    } else {
      for (const auto& [t, m] : by_step_) out.emplace_back(t, &m);
    }
    return out;
  }

private:
  bool is_constant_ = true;
  Matrix constant_;
  std::map<int, Matrix> by_step_;
};

}  // namespace twinsim
