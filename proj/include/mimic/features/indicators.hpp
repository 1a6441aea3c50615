#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mimic/core/error.hpp"

namespace mimic {

/// Indicator output aligned with its input; entries before the warm-up
/// period are disengaged.
using IndicatorSeries = std::vector<std::optional<double>>;

/// Simple moving average. Entry t (t >= window-1) is the mean of
/// prices[t-window+1 .. t]. Uses a compensated running sum.
inline IndicatorSeries sma(std::span<const double> prices, std::size_t window) {
  if (window == 0) throw InvalidArgument("sma: window must be positive");
  if (prices.size() < window) throw InvalidArgument("sma: series shorter than window");

  IndicatorSeries out(prices.size());
  double sum = 0.0;
  double comp = 0.0;  // Neumaier compensation term
  auto add = [&](double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  };
  for (std::size_t t = 0; t < prices.size(); ++t) {
    add(prices[t]);
    if (t >= window) add(-prices[t - window]);
    if (t + 1 >= window) out[t] = (sum + comp) / double(window);
  }
  return out;
}

/// Wilder-smoothed relative strength index.
///
/// The first average gain/loss is the simple mean of the first `period`
/// price changes; afterwards avg <- ((period-1)*avg + current) / period.
/// RSI is 100 with no losses, and 50 when both averages are zero.
/// Entries 0 .. period-1 are disengaged.
inline IndicatorSeries rsi(std::span<const double> prices, std::size_t period = 14) {
  if (period == 0) throw InvalidArgument("rsi: period must be positive");
  if (prices.size() < period + 1) throw InvalidArgument("rsi: series too short");

  auto value = [](double gain, double loss) {
    if (loss == 0.0) return gain == 0.0 ? 50.0 : 100.0;
    return 100.0 - 100.0 / (1.0 + gain / loss);
  };

  IndicatorSeries out(prices.size());
  double avg_gain = 0.0;
  double avg_loss = 0.0;
  for (std::size_t t = 1; t <= period; ++t) {
    const double d = prices[t] - prices[t - 1];
    if (d > 0) avg_gain += d;
    if (d < 0) avg_loss -= d;
  }
  avg_gain /= double(period);
  avg_loss /= double(period);
  out[period] = value(avg_gain, avg_loss);

  const double p = double(period);
  for (std::size_t t = period + 1; t < prices.size(); ++t) {
    const double d = prices[t] - prices[t - 1];
    avg_gain = ((p - 1.0) * avg_gain + (d > 0 ? d : 0.0)) / p;
    avg_loss = ((p - 1.0) * avg_loss + (d < 0 ? -d : 0.0)) / p;
    out[t] = value(avg_gain, avg_loss);
  }
  return out;
}

inline IndicatorSeries rsi14(std::span<const double> prices) { return rsi(prices, 14); }

}  // namespace mimic
