#include "vlab/cli.hpp"

#include "vlab/backtest.hpp"
#include "vlab/error.hpp"
#include "vlab/estimation.hpp"
#include "vlab/fit_document.hpp"
#include "vlab/garch.hpp"
#include "vlab/lstm.hpp"
#include "vlab/lstm_io.hpp"
#include "vlab/market_data.hpp"
#include "vlab/rng.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace vlab::cli {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fixed(double v, int digits = 6) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError(DataError::Kind::missing_file, "cannot write " + path.string());
    return f;
}

struct Data {
    market::PriceSeries prices;
    market::ReturnSeries full;
    market::ReturnSeries train;
    market::ReturnSeries test;
};

Data load(const RunConfig& cfg) {
    if (cfg.input.empty()) throw InvalidArgument("--input is required");
    Data d;
    d.prices = market::load_csv(cfg.input, cfg.column);
    d.full = market::compute_returns(d.prices);
    if (cfg.split) {
        const auto boundary = parse_date(*cfg.split);
        if (!boundary) throw InvalidArgument("cannot parse --split date '" + *cfg.split + "'");
        std::tie(d.train, d.test) = market::train_test_split(d.full, *boundary);
    } else {
        d.train = d.full;
    }
    return d;
}

garch::GarchSpec make_spec(const RunConfig& cfg) {
    const auto kind = dist::parse_kind(cfg.dist);
    return garch::GarchSpec::make(garch::parse_family(cfg.model),
                                  dist::InnovationDist{kind, kind == dist::Kind::normal ? 0.0 : 8.0, 0.0});
}

fs::path out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.out);
    fs::create_directories(dir);
    return dir;
}

DateRange full_range(const market::ReturnSeries& s) { return {s.dates.front(), s.dates.back()}; }

void print_fit(std::ostream& out, const estimation::FitResult& fit) {
    out << "model " << garch::to_string(fit.spec.family) << " (" << dist::to_string(fit.spec.dist.kind)
        << "), n_obs " << fit.n_obs << ", k " << fit.k << ", converged " << (fit.converged ? "yes" : "no")
        << ", iterations " << fit.iterations << '\n';
    out << std::left << std::setw(8) << "param" << std::right << std::setw(14) << "estimate" << std::setw(14)
        << "std err" << std::setw(12) << "p-value" << '\n';
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        out << std::left << std::setw(8) << fit.names[i] << std::right << std::setw(14) << fixed(fit.estimates[i])
            << std::setw(14) << (std::isnan(fit.std_errors[i]) ? "NA" : fixed(fit.std_errors[i])) << std::setw(12)
            << (std::isnan(fit.p_values[i]) ? "NA" : fixed(fit.p_values[i], 4)) << '\n';
    }
    out << "loglik " << fixed(fit.loglik, 4) << "  bic " << fixed(fit.bic, 4) << "  margin " << fixed(fit.margin)
        << '\n';
    if (!fit.diagnostic.empty()) out << "note: " << fit.diagnostic << '\n';
}

estimation::FitResult fit_or_load(const RunConfig& cfg, const Data& data, std::ostream& out) {
    if (!cfg.fit_file.empty()) {
        auto fit = estimation::load_fit_document(cfg.fit_file);
        out << "loaded fit from " << cfg.fit_file << '\n';
        return fit;
    }
    auto fit = estimation::fit(make_spec(cfg), data.train.values);
    print_fit(out, fit);
    return fit;
}

lstm::LstmConfig lstm_config(const RunConfig& cfg) {
    lstm::LstmConfig c;
    if (cfg.epochs) c.epochs = *cfg.epochs;
    if (cfg.batch_size) c.batch_size = *cfg.batch_size;
    if (cfg.learning_rate) c.learning_rate = *cfg.learning_rate;
    if (!cfg.layers.empty()) c.layer_sizes = cfg.layers;
    c.target = lstm::parse_target(cfg.target);
    c.vol_window = cfg.window;
    return c;
}

/// Series the network is trained on: returns, or their rolling volatility.
market::ReturnSeries lstm_series(const market::ReturnSeries& returns, const lstm::LstmConfig& c) {
    if (c.target == lstm::Target::next_return) return returns;
    const auto vol = market::realized_volatility(returns, c.vol_window);
    return {vol.dates, vol.values};
}

lstm::TrainedLstm train_lstm(const RunConfig& cfg, const Data& data, std::ostream& out) {
    const auto config = lstm_config(cfg);
    const auto train_series = lstm_series(data.train, config);
    const auto scaled = lstm::scale_fit_apply(train_series.values, {});
    const auto train_set = lstm::build_windows(train_series, config.window_len, scaled.scaler);

    std::optional<lstm::WindowedDataset> val_set;
    if (!data.test.empty()) {
        const auto test_series = lstm_series(data.test, config);
        if (test_series.size() > config.window_len)
            val_set = lstm::build_windows(test_series, config.window_len, scaled.scaler);
    }
    auto model = lstm::init(config, mix_seed(cfg.seed, 1));
    out << "training LSTM: " << train_set.num_samples() << " windows, layers";
    for (auto h : config.layer_sizes) out << ' ' << h;
    out << ", " << config.epochs << " epochs, batch " << config.batch_size << '\n';
    model = lstm::train(std::move(model), train_set, val_set ? &*val_set : nullptr);
    if (model.epochs_run() > 0) {
        out << "final train mse " << fixed(model.train_loss.back(), 8);
        if (val_set) out << ", validation mse " << fixed(model.val_loss.back(), 8);
        out << '\n';
    }
    return model;
}

void write_report(const fs::path& dir, const std::string& stem, const backtest::BacktestReport& r, std::ostream& out) {
    auto csv = open_out(dir / (stem + ".csv"));
    backtest::write_report_csv(csv, r);
    auto json = open_out(dir / (stem + ".json"));
    backtest::write_summary_json(json, r);
    out << std::left << std::setw(28) << stem << std::right << " windows " << std::setw(5) << r.dates.size()
        << "  rmse " << fixed(r.rmse) << "  mae " << fixed(r.mae) << "  (" << backtest::to_string(r.units) << ")\n";
}

// ---- subcommands ----------------------------------------------------------

int cmd_ingest(const RunConfig& cfg, std::ostream& out) {
    const auto data = load(cfg);
    const auto& r = data.full;
    const double daily = market::sample_std(r.values);
    out << "symbol " << data.prices.symbol << '\n';
    out << "prices " << data.prices.size() << " (" << format_date(data.prices.dates.front()) << " .. "
        << format_date(data.prices.dates.back()) << "), dropped rows " << data.prices.dropped_rows << '\n';
    out << "returns " << r.size() << '\n';
    if (cfg.split) out << "train " << data.train.size() << ", test " << data.test.size() << '\n';
    out << "daily volatility " << fixed(daily) << '\n';
    out << "monthly volatility " << fixed(market::annualize(daily, market::Horizon::monthly)) << '\n';
    out << "annual volatility " << fixed(market::annualize(daily, market::Horizon::annual)) << '\n';
    return 0;
}

int cmd_fit(const RunConfig& cfg, std::ostream& out) {
    const auto data = load(cfg);
    const auto fit = estimation::fit(make_spec(cfg), data.train.values);
    print_fit(out, fit);
    const auto path = out_dir(cfg) / ("fit_" + cfg.model + ".txt");
    estimation::save_fit_document(path, fit);
    out << "wrote " << path.string() << '\n';
    return fit.converged ? 0 : 3;
}

int cmd_select(const RunConfig& cfg, std::ostream& out, bool model_given) {
    const auto data = load(cfg);
    const auto kind = dist::parse_kind(cfg.dist);
    const std::vector<int> grid = {1, 2};
    std::vector<garch::Family> families = {garch::Family::garch, garch::Family::gjr, garch::Family::egarch};
    if (model_given) families = {garch::parse_family(cfg.model)};

    const auto dir = out_dir(cfg);
    auto orders = open_out(dir / "order_selection.csv");
    orders << "family,p,q,bic,status\n";
    std::vector<std::optional<estimation::FitResult>> fits(3);
    for (auto family : families) {
        const auto sel = estimation::select_order(data.train.values, family, kind, grid, grid);
        out << garch::to_string(family) << ": selected (p, q) = (" << sel.p << ", " << sel.q << ")\n";
        for (const auto& c : sel.table) {
            out << "  p=" << c.p << " q=" << c.q << "  " << (c.bic ? fixed(*c.bic, 4) : "-") << "  " << c.status
                << '\n';
            orders << garch::to_string(family) << ',' << c.p << ',' << c.q << ',' << (c.bic ? num(*c.bic) : "")
                   << ',' << c.status << '\n';
        }
        fits[static_cast<std::size_t>(family)] =
            estimation::fit(garch::GarchSpec::make(family, dist::InnovationDist{kind, kind == dist::Kind::normal ? 0.0 : 8.0, 0.0}),
                            data.train.values);
    }

    // BIC table in the layout sector, GARCH, GJR-GARCH, EGARCH.
    auto bic_table = open_out(dir / "bic_table.csv");
    bic_table << "sector,GARCH,GJR-GARCH,EGARCH\n" << cfg.sector;
    for (const auto& f : fits) bic_table << ',' << (f ? num(f->bic) : "");
    bic_table << '\n';
    out << "BIC  " << cfg.sector;
    for (const auto& f : fits) out << "  " << (f ? fixed(f->bic, 2) : "-");
    out << '\n';

    const auto& g = fits[static_cast<std::size_t>(garch::Family::garch)];
    const auto& j = fits[static_cast<std::size_t>(garch::Family::gjr)];
    if (g && j) {
        auto trade = open_out(dir / "bic_tradeoff.csv");
        trade << "sector,garch_loglik,gjr_loglik,loglik_gain,garch_k,gjr_k,garch_bic,gjr_bic,bic_change\n";
        trade << cfg.sector << ',' << num(g->loglik) << ',' << num(j->loglik) << ',' << num(j->loglik - g->loglik)
              << ',' << g->k << ',' << j->k << ',' << num(g->bic) << ',' << num(j->bic) << ','
              << num(j->bic - g->bic) << '\n';
        out << "gjr vs garch: loglik gain " << fixed(j->loglik - g->loglik, 4) << ", bic change "
            << fixed(j->bic - g->bic, 4) << '\n';
    }
    return 0;
}

int cmd_forecast(const RunConfig& cfg, std::ostream& out) {
    const auto data = load(cfg);
    const auto fit = fit_or_load(cfg, data, out);
    const auto path = garch::filter_variance(fit.spec, fit.params, data.full.values);
    const auto fc = garch::forecast(fit.spec, fit.params, path, cfg.horizon, cfg.paths, mix_seed(cfg.seed, 2));
    const auto file = out_dir(cfg) / ("forecast_" + garch::to_string(fit.spec.family) + ".csv");
    auto csv = open_out(file);
    csv << "step,sigma2,sigma\n";
    for (int h = 0; h < fc.horizon; ++h)
        csv << h + 1 << ',' << num(fc.sigma2_path[static_cast<std::size_t>(h)]) << ','
            << num(fc.sigma_path[static_cast<std::size_t>(h)]) << '\n';
    out << "forecast (" << (fc.method == garch::ForecastMethod::analytic ? "analytic" : "simulation") << ") from "
        << format_date(data.full.dates.back()) << ":\n";
    for (int h = 0; h < fc.horizon; ++h)
        out << "  h=" << h + 1 << "  sigma " << fixed(fc.sigma_path[static_cast<std::size_t>(h)]) << '\n';
    out << "wrote " << file.string() << '\n';
    return 0;
}

int cmd_train_lstm(const RunConfig& cfg, std::ostream& out) {
    const auto data = load(cfg);
    const auto model = train_lstm(cfg, data, out);
    const auto dir = out_dir(cfg);
    lstm::save_model(dir / "lstm_model.txt", model);
    auto loss = open_out(dir / "lstm_loss.csv");
    lstm::write_loss_csv(loss, model);
    out << "wrote " << (dir / "lstm_model.txt").string() << " and " << (dir / "lstm_loss.csv").string() << '\n';
    return 0;
}

int cmd_backtest(const RunConfig& cfg, std::ostream& out) {
    const auto data = load(cfg);
    const auto dir = out_dir(cfg);

    if (cfg.model == "lstm") {
        const auto model = cfg.model_file.empty() ? train_lstm(cfg, data, out) : lstm::load_model(cfg.model_file);
        for (auto units : {backtest::Units::scaled, backtest::Units::percent}) {
            const std::string suffix = units == backtest::Units::scaled ? "" : "_percent";
            write_report(dir, "backtest_lstm" + suffix + "_train",
                         backtest::backtest_lstm(model, data.full, full_range(data.train), units), out);
            if (!data.test.empty())
                write_report(dir, "backtest_lstm" + suffix + "_test",
                             backtest::backtest_lstm(model, data.full, full_range(data.test), units), out);
        }
        return 0;
    }

    const auto fit = fit_or_load(cfg, data, out);
    if (!fit.converged) throw NumericError("fit did not converge; refusing to backtest");
    const std::string id = garch::to_string(fit.spec.family);
    write_report(dir, "backtest_" + id + "_train",
                 backtest::backtest_garch(fit, data.full, full_range(data.train), cfg.window), out);
    if (!data.test.empty())
        write_report(dir, "backtest_" + id + "_test",
                     backtest::backtest_garch(fit, data.full, full_range(data.test), cfg.window), out);

    const auto path = garch::filter_variance(fit.spec, fit.params, data.full.values);
    auto cond = open_out(dir / ("conditional_vol_" + id + ".csv"));
    cond << "date,return,conditional_vol\n";
    for (std::size_t t = 0; t < data.full.size(); ++t)
        cond << format_date(data.full.dates[t]) << ',' << num(data.full.values[t]) << ','
             << num(std::sqrt(path.sigma2[t])) << '\n';
    return 0;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
    if (cfg.reports.empty()) throw InvalidArgument("compare needs one or more report summary files");
    std::vector<backtest::BacktestReport> reports;
    for (const auto& file : cfg.reports) {
        std::ifstream in(file, std::ios::binary);
        if (!in) throw DataError(DataError::Kind::missing_file, "cannot open report summary " + file);
        reports.push_back(backtest::read_summary_json(in));
    }
    const auto table = backtest::compare(reports, cfg.sector);
    const auto file = out_dir(cfg) / "comparison.csv";
    auto csv = open_out(file);
    backtest::write_comparison_csv(csv, table);
    for (const auto& r : table.rows)
        out << std::left << std::setw(12) << r.sector << std::setw(8) << r.model_id << std::right << std::setw(14)
            << fixed(r.rmse) << "  " << std::setw(8) << backtest::to_string(r.units) << (r.best ? "  best" : "")
            << '\n';
    out << "wrote " << file.string() << '\n';
    return 0;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    auto spec = make_spec(cfg);
    if (spec.dist.kind == dist::Kind::skew_t) spec.dist.lambda = -0.1;
    garch::GarchParams params{0.05, 0.05, 0.06, 0.0, 0.9};
    if (spec.family == garch::Family::gjr) params = {0.05, 0.05, 0.03, 0.1, 0.88};
    if (spec.family == garch::Family::egarch) params = {0.05, 0.0, 0.15, -0.08, 0.97};
    const auto returns = garch::simulate_path(spec, params, cfg.length, mix_seed(cfg.seed, 3)).returns;
    fs::path file(cfg.out);
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    auto csv = open_out(file);
    csv << "Date,Open,High,Low,Close,Adj Close,Volume\n";
    const std::chrono::sys_days start{Date{std::chrono::year{2017}, std::chrono::January, std::chrono::day{2}}};
    double close = 1000.0;
    std::size_t written = 0;
    for (int day = 0; written <= returns.size(); ++day) {
        const Date date{start + std::chrono::days{day}};
        const std::chrono::weekday wd{std::chrono::sys_days{date}};
        if (wd == std::chrono::Saturday || wd == std::chrono::Sunday) continue;
        if (written > 0) close *= 1.0 + returns[written - 1] / 100.0;
        csv << format_date(date) << ',' << num(close) << ',' << num(close) << ',' << num(close) << ',' << num(close)
            << ',' << num(close) << ",0\n";
        ++written;
    }
    out << "wrote " << written << " simulated " << cfg.model << " prices to " << file.string() << '\n';
    return 0;
}

std::vector<std::size_t> parse_layers(const std::string& text) {
    std::vector<std::size_t> sizes;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t v = 0;
        try {
            v = std::stoul(tok);
        } catch (const std::exception&) {
            throw InvalidArgument("bad --layers entry '" + tok + "'");
        }
        sizes.push_back(v);
    }
    return sizes;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"vlab: GARCH-family and LSTM volatility forecasting"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string layers;

    auto add_data = [&](CLI::App* sub) {
        sub->add_option("--input", cfg.input, "OHLCV CSV file")->required();
        sub->add_option("--column", cfg.column, "price column")->capture_default_str();
        sub->add_option("--split", cfg.split, "last training date (YYYY-MM-DD)");
        sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
        sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    };
    auto add_model = [&](CLI::App* sub, bool allow_lstm) {
        auto* opt = sub->add_option("--model", cfg.model, "model family")->capture_default_str();
        if (allow_lstm)
            opt->check(CLI::IsMember({"garch", "gjr", "egarch", "lstm"}));
        else
            opt->check(CLI::IsMember({"garch", "gjr", "egarch"}));
        sub->add_option("--dist", cfg.dist, "innovation distribution")
            ->check(CLI::IsMember({"normal", "t", "skewt"}))
            ->capture_default_str();
    };
    auto add_lstm = [&](CLI::App* sub) {
        sub->add_option("--epochs", cfg.epochs, "training epochs");
        sub->add_option("--batch-size", cfg.batch_size, "mini-batch size");
        sub->add_option("--lr", cfg.learning_rate, "Adam learning rate");
        sub->add_option("--target", cfg.target, "prediction target")
            ->check(CLI::IsMember({"return", "realized-vol"}))
            ->capture_default_str();
        sub->add_option("--layers", layers, "comma-separated recurrent layer sizes");
        sub->add_option("--window", cfg.window, "realized-volatility / backtest window (days)")->capture_default_str();
    };

    auto* ingest = app.add_subcommand("ingest", "validate a price file and print volatility summary");
    add_data(ingest);
    auto* fit = app.add_subcommand("fit", "fit a GARCH-family model on the training period");
    add_data(fit);
    add_model(fit, false);
    auto* select = app.add_subcommand("select", "BIC order grid and BIC table across families");
    add_data(select);
    add_model(select, false);
    select->add_option("--sector", cfg.sector, "label for the BIC table row")->capture_default_str();
    auto* fc = app.add_subcommand("forecast", "multi-step variance forecast");
    add_data(fc);
    add_model(fc, false);
    fc->add_option("--horizon", cfg.horizon, "forecast horizon (days)")->capture_default_str();
    fc->add_option("--paths", cfg.paths, "Monte-Carlo paths for egarch")->capture_default_str();
    fc->add_option("--fit", cfg.fit_file, "use a saved fit document instead of refitting");
    auto* tl = app.add_subcommand("train-lstm", "train the stacked LSTM");
    add_data(tl);
    add_lstm(tl);
    auto* bt = app.add_subcommand("backtest", "sliding-window backtest of one model");
    add_data(bt);
    add_model(bt, true);
    add_lstm(bt);
    bt->add_option("--fit", cfg.fit_file, "use a saved fit document instead of refitting");
    bt->add_option("--model-file", cfg.model_file, "use a saved LSTM container instead of training");
    auto* cmp = app.add_subcommand("compare", "rank backtest summaries by RMSE");
    cmp->add_option("reports", cfg.reports, "backtest summary JSON files")->required();
    cmp->add_option("--sector", cfg.sector, "sector label")->capture_default_str();
    cmp->add_option("--out", cfg.out, "output directory")->capture_default_str();
    auto* sim = app.add_subcommand("simulate", "write a synthetic OHLCV file from a GARCH-family model");
    add_model(sim, false);
    sim->add_option("--out", cfg.out, "output CSV file")->required();
    sim->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    sim->add_option("--length", cfg.length, "number of returns")->capture_default_str();

    std::vector<const char*> argv{"vlab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return 2;
    }

    try {
        if (!layers.empty()) cfg.layers = parse_layers(layers);
        if (*ingest) return cmd_ingest(cfg, out);
        if (*fit) return cmd_fit(cfg, out);
        if (*select) return cmd_select(cfg, out, select->count("--model") > 0);
        if (*fc) return cmd_forecast(cfg, out);
        if (*tl) return cmd_train_lstm(cfg, out);
        if (*bt) return cmd_backtest(cfg, out);
        if (*cmp) return cmd_compare(cfg, out);
        if (*sim) return cmd_simulate(cfg, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace vlab::cli
