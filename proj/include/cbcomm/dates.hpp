#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace cbcomm {

using Date = std::chrono::year_month_day;

// Strict ISO-8601 calendar date (YYYY-MM-DD). Throws ParameterError.
Date parse_date(std::string_view iso);
std::string format_date(const Date& d);

inline std::chrono::sys_days to_days(const Date& d) { return std::chrono::sys_days{d}; }
inline Date add_days(const Date& d, int n) { return Date{to_days(d) + std::chrono::days{n}}; }

// Closed interval of calendar dates.
struct DateWindow {
  Date start;
  Date end;
  bool contains(const Date& d) const { return start <= d && d <= end; }
};

}  // namespace cbcomm
