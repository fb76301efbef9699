#include "readout/prob_table.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace readout {

ProbTable::ProbTable(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("ragged probability table");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

double ProbTable::total() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

std::vector<double> ProbTable::row_sums() const {
  std::vector<double> out(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out[r] += at(r, c);
  }
  return out;
}

std::vector<double> ProbTable::col_sums() const {
  std::vector<double> out(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out[c] += at(r, c);
  }
  return out;
}

ProbTable ProbTable::compose(const ProbTable& next) const {
  if (cols_ != next.rows_) throw std::invalid_argument("table shapes do not compose");
  ProbTable out(rows_, next.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = at(r, k);
      if (a == 0.0) continue;
      for (std::size_t c = 0; c < next.cols_; ++c) out.at(r, c) += a * next.at(k, c);
    }
  }
  return out;
}

double ProbTable::max_abs_diff(const ProbTable& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw std::invalid_argument("table shapes differ");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    worst = std::max(worst, std::abs(data_[i] - other.data_[i]));
  }
  return worst;
}

ProbTable joint_from_conditional(std::span<const double> marginal, const ProbTable& conditional) {
  if (marginal.size() != conditional.rows()) {
    throw std::invalid_argument("marginal size does not match conditional rows");
  }
  ProbTable out(conditional.rows(), conditional.cols());
  for (std::size_t r = 0; r < conditional.rows(); ++r) {
    for (std::size_t c = 0; c < conditional.cols(); ++c) {
      out.at(r, c) = marginal[r] * conditional.at(r, c);
    }
  }
  return out;
}

}  // namespace readout
