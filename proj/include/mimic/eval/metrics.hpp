#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "mimic/core/error.hpp"

namespace mimic {

struct MetricSet {
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;  ///< fraction, not percent
  std::optional<double> f1;
  std::size_t n = 0;
};

namespace detail {

inline void check_pairs(std::span<const double> pred, std::span<const double> target, const char* who) {
  if (pred.size() != target.size()) throw InvalidArgument(std::string(who) + ": length mismatch");
  if (pred.empty()) throw InvalidArgument(std::string(who) + ": empty input");
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (!std::isfinite(pred[i]) || !std::isfinite(target[i]))
      throw InvalidArgument(std::string(who) + ": non-finite value at index " + std::to_string(i));
}

}  // namespace detail

inline double mae(std::span<const double> pred, std::span<const double> target) {
  detail::check_pairs(pred, target, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
  return s / double(pred.size());
}

inline double rmse(std::span<const double> pred, std::span<const double> target) {
  detail::check_pairs(pred, target, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - target[i]) * (pred[i] - target[i]);
  return std::sqrt(s / double(pred.size()));
}

/// Mean absolute percentage error as a fraction. A zero target is an error.
inline double mape(std::span<const double> pred, std::span<const double> target) {
  detail::check_pairs(pred, target, "mape");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (target[i] == 0.0) throw InvalidArgument("mape: zero target at index " + std::to_string(i));
    s += std::abs(pred[i] - target[i]) / std::abs(target[i]);
  }
  return s / double(pred.size());
}

/// F1 of the positive class; 0 when precision + recall is 0.
inline double f1_binary(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw InvalidArgument("f1_binary: length mismatch");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if ((pred[i] != 0 && pred[i] != 1) || (truth[i] != 0 && truth[i] != 1))
      throw InvalidArgument("f1_binary: labels must be 0 or 1");
    tp += pred[i] == 1 && truth[i] == 1;
    fp += pred[i] == 1 && truth[i] == 0;
    fn += pred[i] == 0 && truth[i] == 1;
  }
  if (tp == 0) return 0.0;
  const double precision = double(tp) / double(tp + fp);
  const double recall = double(tp) / double(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

inline MetricSet regression_metrics(std::span<const double> pred, std::span<const double> target) {
  return MetricSet{mae(pred, target), rmse(pred, target), mape(pred, target), std::nullopt, pred.size()};
}

}  // namespace mimic
