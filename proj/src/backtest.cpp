#include "vlab/backtest.hpp"

#include "vlab/error.hpp"
#include "vlab/garch.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace vlab::backtest {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// [first, last) indices of `dates` inside the span.
std::pair<std::size_t, std::size_t> span_indices(const std::vector<Date>& dates, const DateRange& span) {
    const auto first = std::lower_bound(dates.begin(), dates.end(), span.start);
    const auto last = std::upper_bound(dates.begin(), dates.end(), span.end);
    if (first >= last) return {0, 0};
    return {static_cast<std::size_t>(first - dates.begin()), static_cast<std::size_t>(last - dates.begin())};
}

void finish(BacktestReport& r) {
    r.rmse = rmse(r.predicted, r.realized);
    r.mae = mae(r.predicted, r.realized);
}

}  // namespace

std::string to_string(Units units) { return units == Units::percent ? "percent" : "scaled"; }

Units parse_units(std::string_view name) {
    if (name == "percent") return Units::percent;
    if (name == "scaled") return Units::scaled;
    throw InvalidArgument("unknown units '" + std::string(name) + "'");
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size() || predicted.empty())
        throw InvalidArgument("rmse needs equal, non-empty vectors");
    double ss = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) ss += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
    return std::sqrt(ss / static_cast<double>(predicted.size()));
}

double mae(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size() || predicted.empty())
        throw InvalidArgument("mae needs equal, non-empty vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) s += std::abs(predicted[i] - actual[i]);
    return s / static_cast<double>(predicted.size());
}

BacktestReport backtest_garch(const estimation::FitResult& fit, const market::ReturnSeries& full_returns,
                              const DateRange& span, std::size_t window_len) {
    if (!fit.converged) throw InvalidArgument("backtest needs a converged fit");
    if (window_len < 2) throw InvalidArgument("backtest window must be at least 2 days");
    const auto [first, last] = span_indices(full_returns.dates, span);
    if (last - first < window_len)
        throw InvalidArgument("evaluation span holds " + std::to_string(last - first) +
                              " returns, fewer than the window of " + std::to_string(window_len));

    const auto path = garch::filter_variance(fit.spec, fit.params, full_returns.values);
    BacktestReport r;
    r.model_id = garch::to_string(fit.spec.family);
    r.window_len = window_len;
    r.units = Units::percent;
    r.span = {full_returns.dates[first], full_returns.dates[last - 1]};
    const std::span<const double> returns(full_returns.values);
    for (std::size_t end = first + window_len; end <= last; ++end) {
        const std::size_t start = end - window_len;
        double mean_var = 0.0;
        for (std::size_t s = start; s < end; ++s) mean_var += path.sigma2[s];
        mean_var /= static_cast<double>(window_len);
        r.dates.push_back(full_returns.dates[end - 1]);
        r.predicted.push_back(std::sqrt(mean_var));
        r.realized.push_back(market::sample_std(returns.subspan(start, window_len)));
    }
    finish(r);
    return r;
}

BacktestReport backtest_lstm(const lstm::TrainedLstm& model, const market::ReturnSeries& series,
                             const DateRange& span, Units units) {
    const auto& cfg = model.config;
    const auto [first, last] = span_indices(series.dates, span);
    const bool vol_target = cfg.target == lstm::Target::realized_vol;
    const std::size_t consumed = cfg.window_len + 1 + (vol_target ? cfg.vol_window - 1 : 0);
    if (last - first < consumed)
        throw InvalidArgument("evaluation span holds " + std::to_string(last - first) +
                              " returns, too few for the model window (" + std::to_string(consumed) + " days)");

    market::ReturnSeries in_span;
    in_span.dates.assign(series.dates.begin() + static_cast<std::ptrdiff_t>(first),
                         series.dates.begin() + static_cast<std::ptrdiff_t>(last));
    in_span.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(first),
                          series.values.begin() + static_cast<std::ptrdiff_t>(last));
    if (vol_target) {
        const auto vol = market::realized_volatility(in_span, cfg.vol_window);
        in_span.dates = vol.dates;
        in_span.values = vol.values;
    }
    const auto data = lstm::build_windows(in_span, cfg.window_len, model.scaler);

    BacktestReport r;
    r.model_id = "lstm";
    r.window_len = consumed;
    r.units = units;
    r.span = {series.dates[first], series.dates[last - 1]};
    r.dates = data.target_dates;
    const Eigen::VectorXd pred = lstm::predict(model, data);  // unscaled
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        const double target_scaled = data.targets(i);
        if (units == Units::percent) {
            r.predicted.push_back(pred(i));
            r.realized.push_back(model.scaler.invert(target_scaled));
        } else {
            r.predicted.push_back(model.scaler.apply(pred(i)));
            r.realized.push_back(target_scaled);
        }
    }
    finish(r);
    return r;
}

ComparisonTable compare(std::span<const BacktestReport> reports, const std::string& sector) {
    if (reports.empty()) throw InvalidArgument("nothing to compare");
    ComparisonTable table;
    bool has_percent = false, has_scaled = false;
    for (const auto& r : reports) (r.units == Units::percent ? has_percent : has_scaled) = true;
    const bool mixed = has_percent && has_scaled;

    for (Units units : {Units::percent, Units::scaled}) {
        std::vector<const BacktestReport*> group;
        for (const auto& r : reports)
            if (r.units == units) group.push_back(&r);
        std::stable_sort(group.begin(), group.end(),
                         [](const BacktestReport* a, const BacktestReport* b) { return a->rmse < b->rmse; });
        int rank = 0;
        for (const auto* r : group) {
            ComparisonRow row{sector, r->model_id, r->rmse, units, ++rank, rank == 1, ""};
            if (mixed) row.note = "ranked within " + to_string(units) + " units only; not comparable across units";
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

void write_report_csv(std::ostream& out, const BacktestReport& report) {
    out << "date,predicted,realized\n";
    for (std::size_t i = 0; i < report.dates.size(); ++i)
        out << format_date(report.dates[i]) << ',' << num(report.predicted[i]) << ',' << num(report.realized[i])
            << '\n';
}

void write_summary_json(std::ostream& out, const BacktestReport& report) {
    nlohmann::ordered_json j;
    j["model_id"] = report.model_id;
    j["window_len"] = report.window_len;
    j["rmse"] = report.rmse;
    j["mae"] = report.mae;
    j["units"] = to_string(report.units);
    j["span"] = {{"start", format_date(report.span.start)}, {"end", format_date(report.span.end)}};
    j["rows"] = report.dates.size();
    out << j.dump(2) << '\n';
}

BacktestReport read_summary_json(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
        BacktestReport r;
        r.model_id = j.at("model_id").get<std::string>();
        r.window_len = j.at("window_len").get<std::size_t>();
        r.rmse = j.at("rmse").get<double>();
        r.mae = j.at("mae").get<double>();
        r.units = parse_units(j.at("units").get<std::string>());
        const auto start = parse_date(j.at("span").at("start").get<std::string>());
        const auto end = parse_date(j.at("span").at("end").get<std::string>());
        if (!start || !end) throw DataError(DataError::Kind::bad_date, "report summary: bad span date");
        r.span = {*start, *end};
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(DataError::Kind::bad_value, std::string("report summary: ") + e.what());
    }
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
    out << "sector,model,rmse,units,rank,best,note\n";
    for (const auto& r : table.rows)
        out << r.sector << ',' << r.model_id << ',' << num(r.rmse) << ',' << to_string(r.units) << ',' << r.rank << ','
            << (r.best ? "true" : "false") << ',' << r.note << '\n';
}

}  // namespace vlab::backtest
