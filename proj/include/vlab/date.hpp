#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace vlab {

using Date = std::chrono::year_month_day;

/// Parses `YYYY-MM-DD` or `DD-MM-YYYY`. Returns nullopt for anything else,
/// including well-formed strings naming a nonexistent day.
[[nodiscard]] std::optional<Date> parse_date(std::string_view text);

/// ISO-8601 `YYYY-MM-DD`.
[[nodiscard]] std::string format_date(const Date& date);

/// Inclusive calendar range.
struct DateRange {
    Date start;
    Date end;

    [[nodiscard]] bool contains(const Date& d) const noexcept { return start <= d && d <= end; }
};

}  // namespace vlab
