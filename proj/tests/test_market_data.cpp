#include "vlab/error.hpp"
#include "vlab/market_data.hpp"

#include "doctest.h"
#include "support.hpp"

#include <cmath>

using namespace vlab;
using namespace vlab::market;
using vlab::testing::TempDir;

namespace {

Date ymd(int y, unsigned m, unsigned d) { return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}; }

PriceSeries prices(std::vector<double> closes) {
    PriceSeries p;
    for (std::size_t i = 0; i < closes.size(); ++i)
        p.dates.push_back(Date{std::chrono::sys_days{ymd(2021, 1, 1)} + std::chrono::days{i}});
    p.closes = std::move(closes);
    return p;
}

DataError::Kind load_error(const std::filesystem::path& path, const std::string& column = "Close") {
    try {
        (void)load_csv(path, column);
    } catch (const DataError& e) {
        return e.kind();
    }
    FAIL("expected a DataError");
    return DataError::Kind::invalid_argument;
}

}  // namespace

TEST_CASE("dates parse in both accepted layouts") {
    CHECK(parse_date("2021-03-04") == ymd(2021, 3, 4));
    CHECK(parse_date("04-03-2021") == ymd(2021, 3, 4));
    CHECK(parse_date("\"2021-03-04\"") == ymd(2021, 3, 4));
    CHECK(parse_date("2021-03-04 00:00:00") == ymd(2021, 3, 4));
    CHECK_FALSE(parse_date("2021-02-30"));
    CHECK_FALSE(parse_date("March 4"));
    CHECK(format_date(ymd(2021, 3, 4)) == "2021-03-04");
}

TEST_CASE("three-row sample file loads") {
    const auto p = load_csv(vlab::testing::data_file("sample3.csv"));
    REQUIRE(p.size() == 3);
    CHECK(p.closes == std::vector<double>{100, 110, 99});
    CHECK(p.symbol == "sample3");
    REQUIRE(p.open);
    CHECK((*p.open)[1] == 110);
}

TEST_CASE("loader sorts rows and accepts extra columns") {
    TempDir dir("md_sort");
    const auto f = dir.write("x.csv",
                             "Date,Close,Note\n"
                             "2021-01-05,12,b\n"
                             "2021-01-04,11,a\n"
                             "06-01-2021,13,c\n");
    const auto p = load_csv(f);
    REQUIRE(p.size() == 3);
    CHECK(p.dates.front() == ymd(2021, 1, 4));
    CHECK(p.closes == std::vector<double>{11, 12, 13});
    CHECK_FALSE(p.high);
}

TEST_CASE("blank cells in the requested column are dropped and counted") {
    TempDir dir("md_blank");
    std::string text = "Date,Open,High,Low,Close,Adj Close,Volume\n";
    for (int d = 1; d <= 10; ++d) {
        const std::string close = d == 4 ? "" : std::to_string(100 + d);
        text += "2021-01-" + std::string(d < 10 ? "0" : "") + std::to_string(d) + ",1,1,1," + close + ",1,5\n";
    }
    const auto p = load_csv(dir.write("blank.csv", text));
    CHECK(p.size() == 9);
    CHECK(p.dropped_rows == 1);

    // The other columns follow the requested one.
    const auto adj = load_csv(dir.path() / "blank.csv", "Adj Close");
    CHECK(adj.size() == 10);
    CHECK(adj.dropped_rows == 0);
}

TEST_CASE("null markers count as missing") {
    TempDir dir("md_null");
    const auto p = load_csv(dir.write("n.csv", "Date,Close\n2021-01-01,1\n2021-01-02,null\n2021-01-03,NaN\n2021-01-04,2\n"));
    CHECK(p.size() == 2);
    CHECK(p.dropped_rows == 2);
}

TEST_CASE("loader errors are distinct and name the culprit") {
    TempDir dir("md_err");
    CHECK(load_error(dir.path() / "absent.csv") == DataError::Kind::missing_file);
    CHECK(load_error(dir.write("nocol.csv", "Date,Open\n2021-01-01,1\n2021-01-02,2\n")) ==
          DataError::Kind::missing_column);
    CHECK(load_error(dir.write("one.csv", "Date,Close\n2021-01-01,1\n")) == DataError::Kind::too_few_rows);
    CHECK(load_error(dir.write("date.csv", "Date,Close\n2021-01-01,1\nyesterday,2\n")) == DataError::Kind::bad_date);
    CHECK(load_error(dir.write("val.csv", "Date,Close\n2021-01-01,1\n2021-01-02,abc\n")) == DataError::Kind::bad_value);
    CHECK(load_error(dir.write("neg.csv", "Date,Close\n2021-01-01,1\n2021-01-02,0\n")) ==
          DataError::Kind::nonpositive_price);

    const auto dup = dir.write("dup.csv", "Date,Close\n2021-01-01,1\n2021-01-02,2\n2021-01-02,3\n");
    CHECK(load_error(dup) == DataError::Kind::duplicate_date);
    CHECK_THROWS_WITH_AS((void)load_csv(dup), doctest::Contains("2021-01-02"), DataError);
    CHECK_THROWS_WITH_AS((void)load_csv(dir.path() / "date.csv"), doctest::Contains("row"), DataError);
}

TEST_CASE("percent returns") {
    CHECK(compute_returns(prices({100, 110})).values == std::vector<double>{10.0});
    CHECK(compute_returns(prices({100, 100, 100})).values == std::vector<double>{0.0, 0.0});
    CHECK(compute_returns(prices({100, 50, 75})).values == std::vector<double>{-50.0, 50.0});

    const auto p = prices({100, 110, 99});
    const auto r = compute_returns(p);
    REQUIRE(r.size() == 2);
    CHECK(r.dates[0] == p.dates[1]);
    CHECK(r.dates[1] == p.dates[2]);
    CHECK(r.values[1] == doctest::Approx(-10.0));

    CHECK_THROWS_AS((void)compute_returns(prices({100, -1, 5})), DataError);
    CHECK_THROWS_AS((void)compute_returns(prices({100})), DataError);
}

TEST_CASE("constant prices give zero returns for any length") {
    for (std::size_t n = 2; n < 40; n += 7) {
        const auto r = compute_returns(prices(std::vector<double>(n, 37.25)));
        CHECK(r.size() == n - 1);
        for (double v : r.values) CHECK(v == 0.0);
    }
}

TEST_CASE("realized volatility") {
    const auto ones = make_series({1, 1, 1});
    CHECK(realized_volatility(ones, 3).values == std::vector<double>{0.0});

    const auto two = realized_volatility(make_series({0, 2}), 2);
    REQUIRE(two.size() == 1);
    CHECK(two.values[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    std::vector<double> ten(10);
    for (std::size_t i = 0; i < ten.size(); ++i) ten[i] = std::sin(static_cast<double>(i));
    const auto s10 = make_series(ten);
    const auto v = realized_volatility(s10, 10);
    CHECK(v.size() == 1);
    CHECK(v.dates[0] == s10.dates.back());

    const auto v4 = realized_volatility(s10, 4);
    CHECK(v4.size() == 7);
    CHECK(v4.window_len == 4);
    CHECK(v4.values[2] == doctest::Approx(sample_std(std::span<const double>(ten).subspan(2, 4))));

    CHECK_THROWS_AS((void)realized_volatility(s10, 1), InvalidArgument);
    CHECK_THROWS_AS((void)realized_volatility(s10, 11), InvalidArgument);
}

TEST_CASE("constant returns have zero realized volatility in every window") {
    const auto r = make_series(std::vector<double>(30, -0.4));
    for (std::size_t w : {2u, 5u, 30u})
        for (double v : realized_volatility(r, w).values) CHECK(v == 0.0);
}

TEST_CASE("annualization constants") {
    CHECK(annualize(1.0, Horizon::monthly) == doctest::Approx(4.58258).epsilon(1e-6));
    CHECK(annualize(1.0, Horizon::annual) == doctest::Approx(15.87451).epsilon(1e-6));
    CHECK(annualize(0.0, Horizon::annual) == 0.0);
    CHECK_THROWS_AS((void)annualize(-0.1, Horizon::monthly), InvalidArgument);
    for (double v : {0.01, 0.7, 3.0, 250.0})
        CHECK(annualize(v, Horizon::annual) / annualize(v, Horizon::monthly) ==
              doctest::Approx(std::sqrt(252.0 / 21.0)).epsilon(1e-14));
}

TEST_CASE("train/test split") {
    std::vector<double> v(10);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * static_cast<double>(i) - 2.0;
    const auto s = make_series(v);

    const auto [train, test] = train_test_split(s, s.dates[6]);
    CHECK(train.size() == 7);
    CHECK(test.size() == 3);

    CHECK_THROWS_AS((void)train_test_split(s, Date{std::chrono::sys_days{s.dates[0]} - std::chrono::days{1}}),
                    InvalidArgument);
    CHECK_THROWS_AS((void)train_test_split(s, s.dates.back()), InvalidArgument);

    // A boundary between trading days falls back to the last date before it.
    const auto weekly = [] {
        ReturnSeries w;
        for (int i = 0; i < 5; ++i) {
            w.dates.push_back(Date{std::chrono::sys_days{ymd(2021, 1, 1)} + std::chrono::days{7 * i}});
            w.values.push_back(i);
        }
        return w;
    }();
    CHECK(train_test_split(weekly, ymd(2021, 1, 10)).first.size() == 2);
}

TEST_CASE("split then concatenate reproduces the series") {
    std::vector<double> v(25);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::cos(1.7 * static_cast<double>(i));
    const auto s = make_series(v);
    for (std::size_t cut = 0; cut + 1 < s.size(); ++cut) {
        auto [a, b] = train_test_split(s, s.dates[cut]);
        a.dates.insert(a.dates.end(), b.dates.begin(), b.dates.end());
        a.values.insert(a.values.end(), b.values.begin(), b.values.end());
        CHECK(a.dates == s.dates);
        CHECK(a.values == s.values);
    }
}
