#pragma once

#include "vlab/date.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vlab::market {

/// Daily closing prices loaded from an OHLCV file.
///
/// Dates are strictly increasing and closes strictly positive. The optional
/// OHLCV columns, when present in the file, are aligned with `dates` and hold
/// NaN where the source cell was missing.
struct PriceSeries {
    std::string symbol;
    std::vector<Date> dates;
    std::vector<double> closes;

    std::optional<std::vector<double>> open;
    std::optional<std::vector<double>> high;
    std::optional<std::vector<double>> low;
    std::optional<std::vector<double>> adj_close;
    std::optional<std::vector<double>> volume;

    /// Rows skipped because the requested column was blank or null.
    std::size_t dropped_rows = 0;

    [[nodiscard]] std::size_t size() const noexcept { return closes.size(); }
};

/// Percent returns, each dated at the later day of its price pair.
struct ReturnSeries {
    std::vector<Date> dates;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] bool empty() const noexcept { return values.empty(); }
};

/// Rolling sample standard deviation, dated at each window's last day.
struct VolSeries {
    std::vector<Date> dates;
    std::vector<double> values;
    std::size_t window_len = 0;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

enum class Horizon { monthly, annual };

/// Reads a CSV with a header row. `column` selects the price column used as
/// closes (usually "Close" or "Adj Close"). Throws DataError.
[[nodiscard]] PriceSeries load_csv(const std::filesystem::path& path,
                                   const std::string& column = "Close");

/// 100 * (close[t+1] - close[t]) / close[t].
[[nodiscard]] ReturnSeries compute_returns(const PriceSeries& prices);

[[nodiscard]] VolSeries realized_volatility(const ReturnSeries& returns, std::size_t window_len);

/// Scales a daily volatility by sqrt(21) (monthly) or sqrt(252) (annual).
[[nodiscard]] double annualize(double daily_vol, Horizon horizon);

/// First part holds every date <= boundary, second part the rest.
[[nodiscard]] std::pair<ReturnSeries, ReturnSeries> train_test_split(const ReturnSeries& series,
                                                                     const Date& boundary);

/// Sample standard deviation with divisor n - 1.
[[nodiscard]] double sample_std(std::span<const double> values);

/// Builds a ReturnSeries from bare values with synthetic consecutive dates
/// starting at `first`. Handy for simulated data.
[[nodiscard]] ReturnSeries make_series(std::vector<double> values,
                                       Date first = Date{std::chrono::year{2000},
                                                         std::chrono::January,
                                                         std::chrono::day{1}});

}  // namespace vlab::market
