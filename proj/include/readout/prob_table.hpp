#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace readout {

// Dense row-major table of probabilities. Used both for joint tables
// P(a, b) (rows index a) and for stochastic matrices P(b | a).
class ProbTable {
 public:
  ProbTable() = default;
  ProbTable(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  ProbTable(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> values() const { return data_; }

  double total() const;
  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;

  // Matrix product; both operands read as stochastic matrices.
  ProbTable compose(const ProbTable& next) const;

  // max |a - b| over entries; tables must share a shape.
  double max_abs_diff(const ProbTable& other) const;

  bool operator==(const ProbTable&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Joint table P(a, b) = P(a) * P(b | a).
ProbTable joint_from_conditional(std::span<const double> marginal,
                                 const ProbTable& conditional);

}  // namespace readout
