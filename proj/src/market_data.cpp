#include "vlab/market_data.hpp"

#include "vlab/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace vlab::market {

namespace {

using Kind = DataError::Kind;

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r'))
        s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string_view rest(line);
    while (true) {
        auto comma = rest.find(',');
        cells.push_back(trim(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return cells;
}

bool is_missing(const std::string& cell) {
    return cell.empty() || cell == "null" || cell == "NA" || cell == "NaN" || cell == "nan" ||
           cell == "N/A";
}

std::optional<double> parse_number(const std::string& cell) {
    double value = 0.0;
    const char* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

struct Row {
    Date date;
    double close;
    std::size_t line;
    std::vector<double> extras;
};

}  // namespace

PriceSeries load_csv(const std::filesystem::path& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw DataError(Kind::missing_file, "cannot open price file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError(Kind::too_few_rows, "empty price file: " + path.string());
    const auto header = split_row(line);

    auto find_col = [&](std::string_view name) -> std::optional<std::size_t> {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };

    const auto date_col = find_col("Date");
    if (!date_col) throw DataError(Kind::missing_column, "column 'Date' not found in " + path.string());
    const auto value_col = find_col(column);
    if (!value_col)
        throw DataError(Kind::missing_column, "column '" + column + "' not found in " + path.string());

    static constexpr std::string_view extra_names[] = {"Open", "High", "Low", "Adj Close", "Volume"};
    std::array<std::optional<std::size_t>, 5> extra_cols;
    for (std::size_t i = 0; i < extra_cols.size(); ++i) extra_cols[i] = find_col(extra_names[i]);

    PriceSeries series;
    series.symbol = path.stem().string();
    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_row(line);
        const std::string date_cell = *date_col < cells.size() ? cells[*date_col] : std::string{};
        const auto date = parse_date(date_cell);
        if (!date)
            throw DataError(Kind::bad_date, "unparseable date '" + date_cell + "' at row " +
                                                std::to_string(line_no) + ", column 'Date'");
        const std::string value_cell = *value_col < cells.size() ? cells[*value_col] : std::string{};
        if (is_missing(value_cell)) {
            ++series.dropped_rows;
            continue;
        }
        const auto value = parse_number(value_cell);
        if (!value)
            throw DataError(Kind::bad_value, "unparseable value '" + value_cell + "' at row " +
                                                 std::to_string(line_no) + ", column '" + column + "'");
        Row row{*date, *value, line_no, {}};
        for (const auto& col : extra_cols) {
            double x = std::numeric_limits<double>::quiet_NaN();
            if (col && *col < cells.size() && !is_missing(cells[*col]))
                x = parse_number(cells[*col]).value_or(x);
            row.extras.push_back(x);
        }
        rows.push_back(std::move(row));
    }

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].date == rows[i - 1].date)
            throw DataError(Kind::duplicate_date, "duplicate date " + format_date(rows[i].date) +
                                                      " at row " + std::to_string(rows[i].line));
    }
    if (rows.size() < 2)
        throw DataError(Kind::too_few_rows, "fewer than 2 usable rows in column '" + column + "' of " +
                                                path.string());

    for (std::size_t i = 0; i < extra_cols.size(); ++i) {
        if (!extra_cols[i]) continue;
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(r.extras[i]);
        switch (i) {
            case 0: series.open = std::move(v); break;
            case 1: series.high = std::move(v); break;
            case 2: series.low = std::move(v); break;
            case 3: series.adj_close = std::move(v); break;
            default: series.volume = std::move(v); break;
        }
    }
    for (const auto& r : rows) {
        if (r.close <= 0.0)
            throw DataError(Kind::nonpositive_price, "non-positive price at " + format_date(r.date) +
                                                         " (row " + std::to_string(r.line) + ")");
        series.dates.push_back(r.date);
        series.closes.push_back(r.close);
    }
    return series;
}

ReturnSeries compute_returns(const PriceSeries& prices) {
    if (prices.closes.size() < 2 || prices.dates.size() != prices.closes.size())
        throw DataError(Kind::too_few_rows, "need at least 2 aligned prices to compute returns");
    for (std::size_t i = 0; i < prices.closes.size(); ++i) {
        if (!(prices.closes[i] > 0.0))
            throw DataError(Kind::nonpositive_price, "non-positive close on " + format_date(prices.dates[i]));
    }
    ReturnSeries out;
    out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
    out.values.reserve(prices.closes.size() - 1);
    for (std::size_t t = 0; t + 1 < prices.closes.size(); ++t)
        out.values.push_back(100.0 * (prices.closes[t + 1] - prices.closes[t]) / prices.closes[t]);
    return out;
}

double sample_std(std::span<const double> values) {
    if (values.size() < 2) throw InvalidArgument("sample standard deviation needs at least 2 values");
    // Shifting by the first value makes a constant window exactly zero.
    const double n = static_cast<double>(values.size());
    const double shift = values.front();
    double mean = 0.0;
    for (double v : values) mean += v - shift;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - shift - mean) * (v - shift - mean);
    return std::sqrt(ss / (n - 1.0));
}

VolSeries realized_volatility(const ReturnSeries& returns, std::size_t window_len) {
    if (window_len < 2) throw InvalidArgument("realized volatility window must be at least 2");
    if (window_len > returns.size())
        throw InvalidArgument("realized volatility window " + std::to_string(window_len) +
                              " exceeds series length " + std::to_string(returns.size()));
    VolSeries out;
    out.window_len = window_len;
    const std::span<const double> all(returns.values);
    for (std::size_t end = window_len; end <= returns.size(); ++end) {
        out.values.push_back(sample_std(all.subspan(end - window_len, window_len)));
        out.dates.push_back(returns.dates[end - 1]);
    }
    return out;
}

double annualize(double daily_vol, Horizon horizon) {
    if (!(daily_vol >= 0.0)) throw InvalidArgument("daily volatility must be non-negative");
    return daily_vol * std::sqrt(horizon == Horizon::monthly ? 21.0 : 252.0);
}

std::pair<ReturnSeries, ReturnSeries> train_test_split(const ReturnSeries& series, const Date& boundary) {
    if (series.empty() || boundary < series.dates.front() || boundary >= series.dates.back())
        throw InvalidArgument("split date " + format_date(boundary) + " must lie inside the series range");
    const auto cut = static_cast<std::size_t>(
        std::upper_bound(series.dates.begin(), series.dates.end(), boundary) - series.dates.begin());
    ReturnSeries train, test;
    train.dates.assign(series.dates.begin(), series.dates.begin() + cut);
    train.values.assign(series.values.begin(), series.values.begin() + cut);
    test.dates.assign(series.dates.begin() + cut, series.dates.end());
    test.values.assign(series.values.begin() + cut, series.values.end());
    return {std::move(train), std::move(test)};
}

ReturnSeries make_series(std::vector<double> values, Date first) {
    ReturnSeries out;
    out.values = std::move(values);
    out.dates.reserve(out.values.size());
    const std::chrono::sys_days start{first};
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.dates.emplace_back(start + std::chrono::days{static_cast<int>(i)});
    return out;
}

}  // namespace vlab::market
