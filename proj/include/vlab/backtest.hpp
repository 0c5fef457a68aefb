#pragma once

#include "vlab/date.hpp"
#include "vlab/estimation.hpp"
#include "vlab/lstm.hpp"
#include "vlab/market_data.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace vlab::backtest {

enum class Units { percent, scaled };

[[nodiscard]] std::string to_string(Units units);
[[nodiscard]] Units parse_units(std::string_view name);

/// Predicted vs realized values for one model over an evaluation span.
struct BacktestReport {
    std::string model_id;
    std::size_t window_len = 0;
    std::vector<Date> dates;  // last day of each evaluation window
    std::vector<double> predicted;
    std::vector<double> realized;
    double rmse = 0.0;
    double mae = 0.0;
    Units units = Units::percent;
    DateRange span{};
};

[[nodiscard]] double rmse(std::span<const double> predicted, std::span<const double> actual);
[[nodiscard]] double mae(std::span<const double> predicted, std::span<const double> actual);

/// Sliding-window evaluation with parameters held fixed. For each window of
/// `window_len` consecutive returns inside `span`, realized is the sample
/// standard deviation of the window and predicted is the square root of the
/// mean one-step conditional variance over the same days. The variance path
/// comes from filtering all of `full_returns` (default backcast start).
[[nodiscard]] BacktestReport backtest_garch(const estimation::FitResult& fit,
                                            const market::ReturnSeries& full_returns, const DateRange& span,
                                            std::size_t window_len = 10);

/// Next-step LSTM evaluation. Each row is one supervised sample whose
/// inputs and target all fall inside `span`; report.window_len is the
/// number of return days a row consumes. For the realized-vol target the
/// series is first turned into a rolling volatility with the model's
/// vol_window.
[[nodiscard]] BacktestReport backtest_lstm(const lstm::TrainedLstm& model, const market::ReturnSeries& series,
                                           const DateRange& span, Units units = Units::scaled);

struct ComparisonRow {
    std::string sector;
    std::string model_id;
    double rmse = 0.0;
    Units units = Units::percent;
    int rank = 0;  // 1-based, within the units group
    bool best = false;
    std::string note;
};

/// Rows grouped by units (percent first), ascending rmse inside each group.
struct ComparisonTable {
    std::vector<ComparisonRow> rows;
};

[[nodiscard]] ComparisonTable compare(std::span<const BacktestReport> reports, const std::string& sector);

/// `date,predicted,realized`.
void write_report_csv(std::ostream& out, const BacktestReport& report);
/// JSON object: model_id, window_len, rmse, mae, units, span {start, end}, rows.
void write_summary_json(std::ostream& out, const BacktestReport& report);
/// Reads a summary written by write_summary_json (no per-window data).
[[nodiscard]] BacktestReport read_summary_json(std::istream& in);
/// `sector,model,rmse,units,rank,best,note`.
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);

}  // namespace vlab::backtest
