#include "vlab/backtest.hpp"
#include "vlab/error.hpp"

#include "doctest.h"

#include <cmath>
#include <sstream>

using namespace vlab;
using namespace vlab::backtest;
using garch::Family;

namespace {

estimation::FitResult fixed_fit(Family f, const garch::GarchParams& p) {
    estimation::FitResult fit;
    fit.spec = garch::GarchSpec::make(f);
    fit.params = p;
    fit.converged = true;
    return fit;
}

DateRange range_of(const market::ReturnSeries& s, std::size_t first, std::size_t last) {
    return {s.dates[first], s.dates[last]};
}

BacktestReport report(std::string id, double err, Units units) {
    BacktestReport r;
    r.model_id = std::move(id);
    r.rmse = err;
    r.units = units;
    return r;
}

}  // namespace

TEST_CASE("error metrics") {
    const std::vector<double> p = {1, 2}, a = {1, 4};
    CHECK(rmse(p, a) == doctest::Approx(std::sqrt(2.0)));
    CHECK(mae(p, a) == 1.0);
    CHECK(rmse(a, a) == 0.0);
    CHECK(mae(a, a) == 0.0);
    CHECK(rmse(std::vector<double>{0}, std::vector<double>{3}) == 3.0);
    CHECK(mae(std::vector<double>{0}, std::vector<double>{3}) == 3.0);
    CHECK_THROWS_AS((void)rmse(p, std::vector<double>{1}), InvalidArgument);
    CHECK_THROWS_AS((void)mae(std::vector<double>{}, std::vector<double>{}), InvalidArgument);

    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x(1 + rng.below(30)), y(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] = 10 * rng.uniform();
            y[j] = 10 * rng.uniform();
        }
        CHECK(rmse(x, y) >= mae(x, y));
    }
}

TEST_CASE("garch backtest against a brute-force recomputation") {
    const garch::GarchParams p{0.02, 0.1, 0.1, 0.15, 0.75};
    for (auto fam : {Family::garch, Family::gjr}) {
        const auto series = garch::simulate(garch::GarchSpec::make(fam), p, 300, 61);
        const auto fit = fixed_fit(fam, p);
        const std::size_t first = 120, last = 259;
        const auto rep = backtest_garch(fit, series, range_of(series, first, last), 10);

        const auto& r = series.values;
        std::vector<double> s2(r.size());
        double bc = 0;
        for (double x : r) bc += (x - p.mu) * (x - p.mu);
        s2[0] = bc / 300.0;
        for (std::size_t t = 1; t < r.size(); ++t) {
            const double e = r[t - 1] - p.mu;
            const double g = fam == Family::gjr && e < 0 ? p.gamma : 0.0;
            s2[t] = p.omega + (p.alpha + g) * e * e + p.beta * s2[t - 1];
        }
        const std::size_t span_len = last - first + 1;
        REQUIRE(rep.predicted.size() == span_len - 10 + 1);
        double sq = 0, ab = 0;
        for (std::size_t w = 0; w < rep.predicted.size(); ++w) {
            const std::size_t s = first + w;
            double m = 0, v = 0;
            for (std::size_t t = s; t < s + 10; ++t) m += r[t];
            m /= 10;
            for (std::size_t t = s; t < s + 10; ++t) v += s2[t];
            double ss = 0;
            for (std::size_t t = s; t < s + 10; ++t) ss += (r[t] - m) * (r[t] - m);
            const double realized = std::sqrt(ss / 9), predicted = std::sqrt(v / 10);
            CHECK(std::abs(rep.realized[w] - realized) <= 1e-10);
            CHECK(std::abs(rep.predicted[w] - predicted) <= 1e-10);
            CHECK(rep.dates[w] == series.dates[s + 9]);
            sq += (predicted - realized) * (predicted - realized);
            ab += std::abs(predicted - realized);
        }
        const double n = static_cast<double>(rep.predicted.size());
        CHECK(rep.rmse == doctest::Approx(std::sqrt(sq / n)).epsilon(1e-12));
        CHECK(rep.mae == doctest::Approx(ab / n).epsilon(1e-12));
        CHECK(rep.rmse >= rep.mae);
        CHECK(rep.units == Units::percent);
        CHECK(rep.model_id == garch::to_string(fam));
        CHECK(rep.span.start == series.dates[first]);
        CHECK(rep.span.end == series.dates[last]);
        for (std::size_t w = 1; w < rep.dates.size(); ++w) CHECK(rep.dates[w - 1] < rep.dates[w]);
    }
}

TEST_CASE("constant-variance model predicts sqrt(omega)") {
    const garch::GarchParams p{0.0, 2.25, 0.0, 0.0, 0.0};
    const auto series = garch::simulate(garch::GarchSpec::make(Family::garch), p, 200, 7);
    const auto rep = backtest_garch(fixed_fit(Family::garch, p), series, range_of(series, 1, 199));
    for (double v : rep.predicted) CHECK(v == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(rep.predicted.size() == 199 - 10 + 1);
}

TEST_CASE("garch backtest span rules") {
    const garch::GarchParams p{0.0, 0.1, 0.1, 0.0, 0.8};
    const auto series = garch::simulate(garch::GarchSpec::make(Family::garch), p, 60, 8);
    const auto fit = fixed_fit(Family::garch, p);
    CHECK(backtest_garch(fit, series, range_of(series, 20, 29)).predicted.size() == 1);
    CHECK_THROWS_AS((void)backtest_garch(fit, series, range_of(series, 20, 28)), InvalidArgument);
    auto unconverged = fit;
    unconverged.converged = false;
    CHECK_THROWS_AS((void)backtest_garch(unconverged, series, range_of(series, 0, 59)), InvalidArgument);

    const auto a = backtest_garch(fit, series, range_of(series, 0, 59));
    const auto b = backtest_garch(fit, series, range_of(series, 0, 59));
    CHECK(a.predicted == b.predicted);
    CHECK(a.realized == b.realized);

    // Egarch goes through the same window arithmetic.
    const garch::GarchParams ep{0.0, 0.01, 0.1, -0.05, 0.9};
    const auto e = backtest_garch(fixed_fit(Family::egarch, ep), series, range_of(series, 5, 59), 5);
    CHECK(e.predicted.size() == 55 - 5 + 1);
    CHECK(e.model_id == "egarch");
}

TEST_CASE("lstm backtest") {
    lstm::LstmConfig cfg;
    cfg.layer_sizes = {4, 3};
    cfg.window_len = 5;
    cfg.dropout = 0;
    auto zero = lstm::init(cfg, 1);
    std::fill(zero.weights.begin(), zero.weights.end(), 0.0);
    zero.scaler = {0.0, 10.0};

    std::vector<double> v(40);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 3.0 * std::sin(0.7 * static_cast<double>(i));
    const auto series = market::make_series(v);
    const auto span = range_of(series, 10, 39);

    const auto pct = backtest_lstm(zero, series, span, Units::percent);
    CHECK(pct.window_len == 6);
    REQUIRE(pct.predicted.size() == 30 - 6 + 1);
    double ss = 0;
    for (std::size_t i = 0; i < pct.predicted.size(); ++i) {
        CHECK(pct.predicted[i] == 0.0);
        CHECK(pct.realized[i] == doctest::Approx(v[15 + i]).epsilon(1e-12));
        ss += v[15 + i] * v[15 + i];
    }
    CHECK(pct.rmse == doctest::Approx(std::sqrt(ss / 25)).epsilon(1e-12));
    CHECK(pct.dates.front() == series.dates[15]);
    CHECK(pct.units == Units::percent);
    CHECK(pct.model_id == "lstm");

    const auto scaled = backtest_lstm(zero, series, span);
    CHECK(scaled.units == Units::scaled);
    CHECK(scaled.realized.front() == doctest::Approx(v[15] / 10.0).epsilon(1e-12));
    CHECK(scaled.rmse == doctest::Approx(pct.rmse / 10.0).epsilon(1e-12));

    auto vol_cfg = cfg;
    vol_cfg.target = lstm::Target::realized_vol;
    vol_cfg.vol_window = 4;
    auto vol_model = lstm::init(vol_cfg, 2);
    vol_model.scaler = {0.0, 5.0};
    const auto vol = backtest_lstm(vol_model, series, span);
    CHECK(vol.window_len == 9);
    CHECK(vol.predicted.size() == 30 - 9 + 1);

    CHECK_THROWS_AS((void)backtest_lstm(zero, series, range_of(series, 10, 14)), InvalidArgument);
}

TEST_CASE("memorized windows backtest with tiny error") {
    lstm::LstmConfig cfg;
    cfg.layer_sizes = {128, 64, 32};
    cfg.dropout = 0;
    cfg.batch_size = 8;
    cfg.epochs = 500;
    std::vector<double> v(13);
    Rng rng(4);
    for (auto& x : v) x = 4 * rng.uniform() - 2;
    const auto series = market::make_series(v);
    const auto scaled = lstm::scale_fit_apply(v, {});
    const auto data = lstm::build_windows(series, cfg.window_len, scaled.scaler);
    REQUIRE(data.num_samples() == 8);
    const auto model = lstm::train(lstm::init(cfg, 3), data);
    const auto rep = backtest_lstm(model, series, range_of(series, 0, 12));
    CHECK(rep.predicted.size() == 8);
    CHECK(rep.rmse < 1e-3);
}

TEST_CASE("comparison ranks within units") {
    const std::vector<BacktestReport> three = {report("garch", 10.08, Units::percent),
                                               report("gjr", 10.00, Units::percent),
                                               report("egarch", 9.92, Units::percent)};
    const auto t = compare(three, "Banking");
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[0].model_id == "egarch");
    CHECK(t.rows[1].model_id == "gjr");
    CHECK(t.rows[2].model_id == "garch");
    CHECK(t.rows[0].best);
    CHECK_FALSE(t.rows[1].best);
    CHECK(t.rows[2].rank == 3);
    CHECK(t.rows[0].sector == "Banking");
    CHECK(t.rows[0].note.empty());

    const std::vector<BacktestReport> one = {report("lstm", 0.0147, Units::scaled)};
    const auto single = compare(one, "IT");
    REQUIRE(single.rows.size() == 1);
    CHECK(single.rows[0].best);

    const std::vector<BacktestReport> mixed = {report("lstm", 0.0147, Units::scaled),
                                               report("egarch", 9.92, Units::percent)};
    const auto m = compare(mixed, "Banking");
    REQUIRE(m.rows.size() == 2);
    CHECK(m.rows[0].units == Units::percent);
    CHECK(m.rows[0].best);
    CHECK(m.rows[1].best);
    CHECK(m.rows[1].rank == 1);
    CHECK_FALSE(m.rows[1].note.empty());

    CHECK_THROWS_AS((void)compare(std::vector<BacktestReport>{}, "x"), InvalidArgument);
}

TEST_CASE("report serialization") {
    const garch::GarchParams p{0.0, 0.1, 0.1, 0.0, 0.8};
    const auto series = garch::simulate(garch::GarchSpec::make(Family::garch), p, 40, 9);
    const auto rep = backtest_garch(fixed_fit(Family::garch, p), series, range_of(series, 0, 39));

    std::ostringstream csv;
    write_report_csv(csv, rep);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "date,predicted,realized");
    std::size_t rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == rep.dates.size());

    std::stringstream json;
    write_summary_json(json, rep);
    const auto back = read_summary_json(json);
    CHECK(back.model_id == "garch");
    CHECK(back.window_len == 10);
    CHECK(back.rmse == rep.rmse);
    CHECK(back.mae == rep.mae);
    CHECK(back.units == Units::percent);
    CHECK(back.span.start == rep.span.start);
    CHECK(back.span.end == rep.span.end);

    const auto table = compare(std::vector<BacktestReport>{rep}, "Auto");
    std::ostringstream cmp;
    write_comparison_csv(cmp, table);
    CHECK(cmp.str().rfind("sector,model,rmse,units,rank,best,note\nAuto,garch,", 0) == 0);

    std::istringstream junk("{\"model_id\": 3}");
    CHECK_THROWS_AS((void)read_summary_json(junk), DataError);
    for (auto u : {Units::percent, Units::scaled}) CHECK(parse_units(to_string(u)) == u);
}
