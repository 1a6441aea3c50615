#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mimic/core/error.hpp"

namespace mimic {

/// Column order of the numeric feature block. Every model consumes numeric
/// features in exactly this order.
enum class NumericColumn : std::size_t {
  // macroeconomic
  gdp_growth,
  inflation_rate,
  // market
  nifty_open,
  nifty_close,
  nifty_volume,
  // technical
  sma20,
  sma50,
  rsi14,
  // financial statement items
  sales,
  expenses,
  operating_profit,
  other_income,
  interest_expense,
  depreciation,
  profit_before_tax,
  tax_rate,
  net_profit,
  eps,
  dividend_payout,
  equity_capital,
  reserves,
  borrowings,
  other_liabilities,
  total_liabilities,
  fixed_assets,
  cwip,
  investments,
  other_assets,
  total_assets,
  // cash flow
  cash_from_operating_activities,
  cash_from_investing_activities,
  cash_from_financing_activities,
  net_cash_flow,
  // additional metrics
  revenue,
  financing_profit,
  financing_margin,
  deposits,
  borrowing,
  // price on the call day
  open_d,
  count_
};

inline constexpr std::size_t kNumericWidth = std::size_t(NumericColumn::count_);

inline constexpr std::array<std::string_view, kNumericWidth> kNumericColumnNames = {
    "gdp_growth",
    "inflation_rate",
    "nifty_open",
    "nifty_close",
    "nifty_volume",
    "sma20",
    "sma50",
    "rsi14",
    "sales",
    "expenses",
    "operating_profit",
    "other_income",
    "interest_expense",
    "depreciation",
    "profit_before_tax",
    "tax_rate",
    "net_profit",
    "eps",
    "dividend_payout",
    "equity_capital",
    "reserves",
    "borrowings",
    "other_liabilities",
    "total_liabilities",
    "fixed_assets",
    "cwip",
    "investments",
    "other_assets",
    "total_assets",
    "cash_from_operating_activities",
    "cash_from_investing_activities",
    "cash_from_financing_activities",
    "net_cash_flow",
    "revenue",
    "financing_profit",
    "financing_margin",
    "deposits",
    "borrowing",
    "open_d",
};

inline constexpr std::size_t kFirstFundamental = std::size_t(NumericColumn::sales);
inline constexpr std::size_t kLastFundamental = std::size_t(NumericColumn::borrowing);

inline constexpr bool is_fundamental(std::size_t column) {
  return column >= kFirstFundamental && column <= kLastFundamental;
}

inline std::optional<std::size_t> numeric_column_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumericWidth; ++i)
    if (kNumericColumnNames[i] == name) return i;
  return std::nullopt;
}

/// Named numeric features of one instance. Missing values are kept as
/// disengaged optionals and only become NaN when flattened into a model row.
class NumericFeatureVector {
 public:
  static constexpr std::size_t size() { return kNumericWidth; }

  [[nodiscard]] const std::optional<double>& operator[](NumericColumn c) const { return values_[std::size_t(c)]; }
  std::optional<double>& operator[](NumericColumn c) { return values_[std::size_t(c)]; }
  [[nodiscard]] const std::optional<double>& at(std::size_t i) const { return values_.at(i); }
  std::optional<double>& at(std::size_t i) { return values_.at(i); }

  [[nodiscard]] std::optional<double> get(std::string_view name) const {
    const auto idx = numeric_column_index(name);
    if (!idx) throw InvalidArgument("unknown numeric feature '" + std::string(name) + "'");
    return values_[*idx];
  }

  void set(std::string_view name, std::optional<double> value) {
    const auto idx = numeric_column_index(name);
    if (!idx) throw InvalidArgument("unknown numeric feature '" + std::string(name) + "'");
    values_[*idx] = value;
  }

  [[nodiscard]] std::size_t missing_count() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += !v.has_value();
    return n;
  }

  /// Appends the vector to `row`, encoding missing entries as quiet NaN.
  void append_to(std::vector<double>& row) const {
    for (const auto& v : values_) row.push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
  }

  friend bool operator==(const NumericFeatureVector&, const NumericFeatureVector&) = default;

 private:
  std::array<std::optional<double>, kNumericWidth> values_{};
};

}  // namespace mimic
