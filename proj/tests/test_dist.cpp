#include "vlab/dist.hpp"
#include "vlab/error.hpp"

#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

using namespace vlab;
using namespace vlab::dist;

namespace {

// Adaptive Gauss-Kronrod on [lo, hi], split at the skew-t regime switch.
double quad(const std::function<double(double)>& f, double kink, double lo = -50.0, double hi = 50.0) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    return GK::integrate(f, lo, kink, 20, 1e-14) + GK::integrate(f, kink, hi, 20, 1e-14);
}

// Hansen's density written directly from its definition.
double hansen_pdf(double z, double nu, double lambda) {
    const double c = std::tgamma((nu + 1) / 2) / (std::sqrt(std::numbers::pi * (nu - 2)) * std::tgamma(nu / 2));
    const double a = 4 * lambda * c * (nu - 2) / (nu - 1);
    const double b = std::sqrt(1 + 3 * lambda * lambda - a * a);
    const double s = z < -a / b ? 1 - lambda : 1 + lambda;
    const double u = (b * z + a) / s;
    return b * c * std::pow(1 + u * u / (nu - 2), -(nu + 1) / 2);
}

// Unit-variance Student-t density.
double std_t_pdf(double z, double nu) {
    const double k = std::tgamma((nu + 1) / 2) / (std::sqrt(std::numbers::pi * (nu - 2)) * std::tgamma(nu / 2));
    return k * std::pow(1 + z * z / (nu - 2), -(nu + 1) / 2);
}

double kink_of(const InnovationDist& d) {
    const LogDensity g(d);
    return -g.a() / g.b();
}

std::vector<InnovationDist> supported() {
    return {InnovationDist::normal(),        InnovationDist::student_t(4.5),    InnovationDist::student_t(30),
            InnovationDist::skew_t(5, 0.0),  InnovationDist::skew_t(6, 0.2),    InnovationDist::skew_t(8, -0.6),
            InnovationDist::skew_t(12, 0.85), InnovationDist::skew_t(4.2, -0.3)};
}

}  // namespace

TEST_CASE("validation of shape parameters") {
    CHECK_NOTHROW(validate(InnovationDist::normal()));
    CHECK_THROWS_AS(validate(InnovationDist{Kind::student_t, 2.0, 0.0}), InvalidArgument);
    CHECK_THROWS_AS(validate(InnovationDist{Kind::skew_t, 5.0, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(validate(InnovationDist{Kind::skew_t, 5.0, -1.2}), InvalidArgument);
    CHECK_THROWS_AS(validate(InnovationDist{Kind::normal, 5.0, 0.0}), InvalidArgument);
    CHECK(InnovationDist::normal().shape_count() == 0);
    CHECK(InnovationDist::student_t(5).shape_count() == 1);
    CHECK(InnovationDist::skew_t(5, 0.1).shape_count() == 2);
    for (auto k : {Kind::normal, Kind::student_t, Kind::skew_t}) CHECK(parse_kind(to_string(k)) == k);
    CHECK_THROWS_AS((void)parse_kind("laplace"), InvalidArgument);
}

TEST_CASE("log density examples") {
    CHECK(log_density(0.0, InnovationDist::normal()) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)));
    CHECK(log_density(0.0, InnovationDist::normal()) == doctest::Approx(-0.918939).epsilon(1e-6));
    CHECK(log_density(0.0, InnovationDist::skew_t(5, 0)) ==
          doctest::Approx(log_density(0.0, InnovationDist::student_t(5))).epsilon(1e-14));
    CHECK(log_density(0.0, InnovationDist::student_t(5)) == doctest::Approx(std::log(std_t_pdf(0.0, 5))).epsilon(1e-13));

    const auto d = InnovationDist::skew_t(6, 0.2);
    CHECK(std::exp(log_density(1.3, d)) == doctest::Approx(hansen_pdf(1.3, 6, 0.2)).epsilon(1e-12));
    CHECK(quad([&](double z) { return std::exp(log_density(z, d)); }, kink_of(d)) == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS((void)log_density(std::nan(""), d), InvalidArgument);
    CHECK_THROWS_AS((void)log_density(INFINITY, InnovationDist::normal()), InvalidArgument);
    CHECK(std::isfinite(log_density(1e6, d)));
}

TEST_CASE("skew-t matches the direct formula across its domain") {
    for (double nu : {2.3, 3.0, 7.5, 40.0})
        for (double lambda : {-0.95, -0.4, 0.0, 0.3, 0.9})
            for (double z = -6; z <= 6; z += 0.37) {
                const double expect = hansen_pdf(z, nu, lambda);
                CHECK(std::exp(log_density(z, InnovationDist::skew_t(nu, lambda))) ==
                      doctest::Approx(expect).epsilon(1e-11));
            }
}

TEST_CASE("every supported density integrates to one with zero mean and unit variance") {
    for (const auto& d : supported()) {
        CAPTURE(to_string(d.kind));
        CAPTURE(d.nu);
        CAPTURE(d.lambda);
        const LogDensity g(d);
        const double k = kink_of(d);
        const auto pdf = [&](double z) { return std::exp(g(z)); };
        CHECK(quad(pdf, k) == doctest::Approx(1.0).epsilon(1e-6));
        // The t tails leave measurable first and second moments outside [-50, 50].
        const double r = d.kind == Kind::normal ? 50.0 : 5000.0;
        CHECK(std::abs(quad([&](double z) { return z * pdf(z); }, k, -r, r)) < 1e-6);
        CHECK(quad([&](double z) { return z * z * pdf(z); }, k, -r, r) == doctest::Approx(1.0).epsilon(1e-5));
    }
}

TEST_CASE("lambda = 0 collapses onto the standardized Student-t") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const double nu = 2.1 + 60 * rng.uniform();
        const double z = -10 + 20 * rng.uniform();
        CHECK(std::abs(log_density(z, InnovationDist::skew_t(nu, 0.0)) -
                       log_density(z, InnovationDist::student_t(nu))) <= 1e-12);
    }
}

TEST_CASE("skew-t density is continuous at the regime switch") {
    for (double lambda : {-0.8, -0.1, 0.25, 0.7}) {
        const auto d = InnovationDist::skew_t(5.5, lambda);
        const double k = kink_of(d);
        const double left = log_density(std::nextafter(k, -INFINITY), d);
        const double right = log_density(std::nextafter(k, INFINITY), d);
        CHECK(std::abs(left - right) < 1e-9);
    }
}

TEST_CASE("cdf agrees with integrating the density") {
    for (const auto& d : supported()) {
        const LogDensity g(d);
        const double k = kink_of(d);
        for (double z : {-2.5, -0.3, 0.0, 0.4, 1.9}) {
            using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
            const auto pdf = [&](double x) { return std::exp(g(x)); };
            double mass = 0.0;
            if (z <= k)
                mass = GK::integrate(pdf, -2000.0, z, 25, 1e-14);
            else
                mass = GK::integrate(pdf, -2000.0, k, 25, 1e-14) + GK::integrate(pdf, k, z, 25, 1e-14);
            CHECK(cdf(z, d) == doctest::Approx(mass).epsilon(1e-6));
        }
        CHECK(cdf(-1e6, d) < 1e-6);
        CHECK(cdf(1e6, d) > 1 - 1e-6);
    }
}

TEST_CASE("absolute moment") {
    CHECK(abs_moment(InnovationDist::normal()) == doctest::Approx(std::sqrt(2 / std::numbers::pi)).epsilon(1e-15));
    CHECK(abs_moment(InnovationDist::normal()) == doctest::Approx(0.797885).epsilon(1e-6));
    CHECK(std::abs(abs_moment(InnovationDist::student_t(1000)) - 0.797885) < 1e-3);
    CHECK(abs_moment(InnovationDist::skew_t(5, 0)) == doctest::Approx(abs_moment(InnovationDist::student_t(5))).epsilon(1e-13));

    for (const auto& d : supported()) {
        const LogDensity g(d);
        const double expect = quad([&](double z) { return std::abs(z) * std::exp(g(z)); }, kink_of(d), -5000, 5000);
        // The kink of |z| at zero is handled by the adaptive refinement.
        CHECK(abs_moment(d) == doctest::Approx(expect).epsilon(1e-7));
    }
}

TEST_CASE("sampling is deterministic per seed") {
    CHECK(sample(InnovationDist::normal(), 5, 7) == sample(InnovationDist::normal(), 5, 7));
    CHECK(sample(InnovationDist::normal(), 5, 7) != sample(InnovationDist::normal(), 5, 8));
    CHECK(sample(InnovationDist::skew_t(5, 0.3), 50, 1) == sample(InnovationDist::skew_t(5, 0.3), 50, 1));

    Sampler s(InnovationDist::student_t(6), 99);
    const auto batch = sample(InnovationDist::student_t(6), 4, 99);
    for (double x : batch) CHECK(s() == x);
}

TEST_CASE("sample moments") {
    const auto moments = [](const std::vector<double>& x) {
        const double n = static_cast<double>(x.size());
        const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
        double m2 = 0, m3 = 0;
        for (double v : x) {
            m2 += (v - mean) * (v - mean) / n;
            m3 += (v - mean) * (v - mean) * (v - mean) / n;
        }
        return std::array<double, 3>{mean, m2, m3 / std::pow(m2, 1.5)};
    };
    const auto normal = moments(sample(InnovationDist::normal(), 200000, 12));
    CHECK(std::abs(normal[0]) < 0.01);
    CHECK(std::abs(normal[1] - 1) < 0.02);

    const auto skewed = moments(sample(InnovationDist::skew_t(5, 0.3), 200000, 13));
    CHECK(skewed[2] > 0);
    CHECK(std::abs(skewed[0]) < 0.02);
    CHECK(std::abs(skewed[1] - 1) < 0.1);

    const auto left = moments(sample(InnovationDist::skew_t(8, -0.5), 100000, 14));
    CHECK(left[2] < 0);
}
