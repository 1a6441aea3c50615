#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "mimic/core/matrix.hpp"

namespace mimic {

/// Per-column z-scoring with statistics from the fitting rows. NaN entries
/// are ignored when fitting and map to 0 (the column mean) when applied.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> scale) : mean_(std::move(mean)), scale_(std::move(scale)) {}

  static Standardizer identity(std::size_t width) {
    return Standardizer(std::vector<double>(width, 0.0), std::vector<double>(width, 1.0));
  }

  static Standardizer fit(const Matrix& x) {
    std::vector<double> mean(x.cols(), 0.0), scale(x.cols(), 1.0);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < x.rows(); ++i)
        if (const double v = x(i, j); !std::isnan(v)) {
          sum += v;
          ++n;
        }
      if (n == 0) continue;
      mean[j] = sum / double(n);
      double ss = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i)
        if (const double v = x(i, j); !std::isnan(v)) ss += (v - mean[j]) * (v - mean[j]);
      const double sd = std::sqrt(ss / double(n));
      scale[j] = sd > 1e-12 * std::max(1.0, std::abs(mean[j])) ? sd : 1.0;
    }
    return Standardizer(std::move(mean), std::move(scale));
  }

  [[nodiscard]] std::size_t width() const { return mean_.size(); }

  void apply(std::span<const double> row, std::span<double> out) const {
    for (std::size_t j = 0; j < mean_.size(); ++j)
      out[j] = std::isnan(row[j]) ? 0.0 : (row[j] - mean_[j]) / scale_[j];
  }

  [[nodiscard]] Matrix apply(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) apply(x.row(i), out.row(i));
    return out;
  }

  [[nodiscard]] const std::vector<double>& mean() const { return mean_; }
  [[nodiscard]] const std::vector<double>& scale() const { return scale_; }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

}  // namespace mimic
