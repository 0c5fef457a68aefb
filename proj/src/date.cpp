#include "vlab/date.hpp"

#include <charconv>
#include <cstdio>

namespace vlab {

namespace {

std::optional<int> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    int value = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '"' || text.back() == '\r'))
        text.remove_suffix(1);
    // Timestamps like "2021-01-04 00:00:00" keep only the date part.
    if (auto sp = text.find_first_of(" T"); sp != std::string_view::npos) text = text.substr(0, sp);

    std::optional<int> y, m, d;
    if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
        y = parse_int(text.substr(0, 4));
        m = parse_int(text.substr(5, 2));
        d = parse_int(text.substr(8, 2));
    } else if (text.size() == 10 && text[2] == '-' && text[5] == '-') {
        d = parse_int(text.substr(0, 2));
        m = parse_int(text.substr(3, 2));
        y = parse_int(text.substr(6, 4));
    } else {
        return std::nullopt;
    }
    if (!y || !m || !d || *m < 1 || *m > 12 || *d < 1 || *d > 31) return std::nullopt;

    const Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                    std::chrono::day{static_cast<unsigned>(*d)}};
    if (!date.ok()) return std::nullopt;
    return date;
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

}  // namespace vlab
