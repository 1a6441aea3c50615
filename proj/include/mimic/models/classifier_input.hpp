#pragma once

#include <cmath>
#include <span>
#include <string>

#include "mimic/core/error.hpp"
#include "mimic/core/matrix.hpp"

namespace mimic::detail {

inline void check_classifier_inputs(const Matrix& x, std::span<const int> labels, const char* who) {
  if (x.rows() != labels.size()) throw InvalidArgument(std::string(who) + ": feature/label row counts differ");
  if (x.rows() < 2) throw InvalidArgument(std::string(who) + ": need at least 2 rows");
  if (x.cols() == 0) throw InvalidArgument(std::string(who) + ": need at least 1 feature");
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw InvalidArgument(std::string(who) + ": labels must be 0 or 1");
    pos += std::size_t(y);
  }
  if (pos == 0 || pos == labels.size()) throw TrainingError(std::string(who) + ": labels contain a single class");
  for (double v : x.data())
    if (!std::isfinite(v)) throw InvalidArgument(std::string(who) + ": non-finite feature value");
}

inline void check_width(std::span<const double> row, std::size_t width, const char* who) {
  if (row.size() != width)
    throw InvalidArgument(std::string(who) + ": row width " + std::to_string(row.size()) + " does not match model width " +
                          std::to_string(width));
}

}  // namespace mimic::detail
