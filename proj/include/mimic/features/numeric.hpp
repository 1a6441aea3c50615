#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "mimic/dataset/types.hpp"
#include "mimic/features/indicators.hpp"

namespace mimic {

/// Bars dated on or before `day`. Requires bars sorted by date.
inline std::span<const PriceBar> history_through(std::span<const PriceBar> bars, Date day) {
  const auto end = std::upper_bound(bars.begin(), bars.end(), day,
                                    [](Date d, const PriceBar& b) { return d < b.date; });
  return bars.first(std::size_t(end - bars.begin()));
}

/// Latest observation published strictly before `day` (step interpolation).
inline std::optional<double> latest_before(std::span<const DatedValue> series, Date day) {
  std::optional<double> out;
  for (const auto& obs : series) {
    if (obs.date >= day) break;
    out = obs.value;
  }
  return out;
}

/// Fundamentals of the most recent fiscal year whose period ended strictly
/// before `day`, or nullptr.
inline const FundamentalsRecord* fundamentals_before(std::span<const FundamentalsRecord> records, Date day) {
  const FundamentalsRecord* best = nullptr;
  for (const auto& r : records)
    if (r.period_end < day && (!best || r.period_end > best->period_end)) best = &r;
  return best;
}

/// Builds the numeric feature vector for one instance.
///
/// Technical indicators use company closes dated on or before the call day;
/// market data comes from the index bar of the call day; macro values and
/// fundamentals use the latest figures strictly before the call day. Nothing
/// after the call day is read.
inline NumericFeatureVector assemble_numeric(const EarningsInstance& inst, const Company& company,
                                             const MarketContext& market) {
  using C = NumericColumn;
  NumericFeatureVector v;

  const auto index_hist = history_through(market.nifty, inst.call_date);
  if (index_hist.empty() || index_hist.back().date != inst.call_date)
    throw DataError("market context has no index bar for " + inst.call_date.iso() + " (" + inst.key() + ")");
  v[C::nifty_open] = index_hist.back().open;
  v[C::nifty_close] = index_hist.back().close;
  v[C::nifty_volume] = index_hist.back().volume;

  v[C::gdp_growth] = latest_before(market.gdp_growth, inst.call_date);
  v[C::inflation_rate] = latest_before(market.inflation_rate, inst.call_date);

  const auto hist = history_through(company.prices, inst.call_date);
  std::vector<double> closes;
  closes.reserve(hist.size());
  for (const auto& b : hist) closes.push_back(b.close);
  if (closes.size() >= 20) v[C::sma20] = sma(std::span(closes).last(20), 20).back();
  if (closes.size() >= 50) v[C::sma50] = sma(std::span(closes).last(50), 50).back();
  if (closes.size() >= 15) v[C::rsi14] = rsi14(closes).back();

  if (const auto* f = fundamentals_before(company.fundamentals, inst.call_date)) {
    for (std::size_t col = kFirstFundamental; col <= kLastFundamental; ++col) {
      const auto it = f->values.find(std::string(kNumericColumnNames[col]));
      if (it != f->values.end()) v.at(col) = it->second;
    }
  }

  v[C::open_d] = inst.open_d;
  return v;
}

}  // namespace mimic
