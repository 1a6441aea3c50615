#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "mimic/core/error.hpp"

namespace mimic {

/// Calendar date with day resolution, stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
  constexpr Date(int y, unsigned m, unsigned d)
      : days_(std::chrono::sys_days(std::chrono::year(y) / std::chrono::month(m) / std::chrono::day(d))) {}

  /// Parses strict ISO-8601 `YYYY-MM-DD`.
  static Date parse(std::string_view text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    const std::string buf(text);
    if (buf.size() != 10 || buf[4] != '-' || buf[7] != '-' ||
        std::sscanf(buf.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
      throw DataError("invalid date '" + buf + "', expected YYYY-MM-DD");
    }
    const std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(m), std::chrono::day(d)};
    if (!ymd.ok()) throw DataError("invalid calendar date '" + buf + "'");
    return Date(std::chrono::sys_days(ymd));
  }

  [[nodiscard]] std::string iso() const {
    const std::chrono::year_month_day ymd(days_);
    char out[16];
    std::snprintf(out, sizeof out, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()));
    return out;
  }

  [[nodiscard]] constexpr std::chrono::sys_days days() const { return days_; }
  [[nodiscard]] constexpr long serial() const { return days_.time_since_epoch().count(); }
  [[nodiscard]] int year() const { return int(std::chrono::year_month_day(days_).year()); }

  /// 0 = Sunday ... 6 = Saturday.
  [[nodiscard]] unsigned weekday() const { return std::chrono::weekday(days_).c_encoding(); }

  [[nodiscard]] constexpr Date plus_days(long n) const { return Date(days_ + std::chrono::days(n)); }

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace mimic
