#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mimic/core/error.hpp"

namespace mimic {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    if (rows.empty()) return m;
    m.cols_ = rows.front().size();
    for (const auto& r : rows) m.push_row(r);
    return m;
  }

  void push_row(std::span<const double> row) {
    if (rows_ == 0 && data_.empty()) cols_ = row.size();
    if (row.size() != cols_) throw InvalidArgument("Matrix::push_row: width mismatch");
    data_.insert(data_.end(), row.begin(), row.end());
    ++rows_;
  }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }

  [[nodiscard]] std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  [[nodiscard]] Matrix select_rows(std::span<const std::size_t> idx) const {
    Matrix out;
    out.cols_ = cols_;
    out.data_.reserve(idx.size() * cols_);
    for (auto i : idx) out.push_row(row(i));
    return out;
  }

  [[nodiscard]] const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace mimic
