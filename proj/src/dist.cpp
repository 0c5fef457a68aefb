#include "vlab/dist.hpp"

#include "vlab/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace vlab::dist {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // ln(2 pi) / 2

/// ln c for Hansen's constant c = G((nu+1)/2) / (sqrt(pi (nu-2)) G(nu/2)).
double log_c(double nu) {
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
           0.5 * std::log(std::numbers::pi * (nu - 2.0));
}

struct SkewConstants {
    double a;
    double b;
    double c;
};

SkewConstants skew_constants(double nu, double lambda) {
    const double c = std::exp(log_c(nu));
    const double a = 4.0 * lambda * c * (nu - 2.0) / (nu - 1.0);
    const double b = std::sqrt(1.0 + 3.0 * lambda * lambda - a * a);
    return {a, b, c};
}

/// CDF of the unit-variance Student-t.
double unit_t_cdf(double u, double nu) {
    if (u == std::numeric_limits<double>::infinity()) return 1.0;
    if (u == -std::numeric_limits<double>::infinity()) return 0.0;
    // Double precision throughout; the default policy promotes to long double.
    using Policy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;
    const boost::math::students_t_distribution<double, Policy> t(nu);
    return boost::math::cdf(t, u * std::sqrt(nu / (nu - 2.0)));
}

/// Upper partial first moment of the unit-variance Student-t: int_k^inf u f(u) du.
double unit_t_upper_moment(double k, double nu, double c) {
    if (std::isinf(k)) return 0.0;
    return c * (nu - 2.0) / (nu - 1.0) * std::pow(1.0 + k * k / (nu - 2.0), -0.5 * (nu - 1.0));
}

double skew_t_cdf(double z, double nu, double lambda, const SkewConstants& k) {
    const double x = k.b * z + k.a;
    if (z < -k.a / k.b) return (1.0 - lambda) * unit_t_cdf(x / (1.0 - lambda), nu);
    return 0.5 * (1.0 - lambda) + (1.0 + lambda) * (unit_t_cdf(x / (1.0 + lambda), nu) - 0.5);
}

}  // namespace

InnovationDist InnovationDist::student_t(double nu) {
    InnovationDist d{Kind::student_t, nu, 0.0};
    validate(d);
    return d;
}

InnovationDist InnovationDist::skew_t(double nu, double lambda) {
    InnovationDist d{Kind::skew_t, nu, lambda};
    validate(d);
    return d;
}

int InnovationDist::shape_count() const noexcept {
    switch (kind) {
        case Kind::normal: return 0;
        case Kind::student_t: return 1;
        case Kind::skew_t: return 2;
    }
    return 0;
}

void validate(const InnovationDist& d) {
    if (d.kind == Kind::normal && (d.nu != 0.0 || d.lambda != 0.0))
        throw InvalidArgument("the normal distribution has no shape parameters");
    if (d.kind == Kind::student_t && d.lambda != 0.0)
        throw InvalidArgument("the Student-t distribution has no skewness parameter");
    if (d.kind != Kind::normal && !(d.nu > 2.0 && std::isfinite(d.nu)))
        throw InvalidArgument("degrees of freedom must exceed 2, got " + std::to_string(d.nu));
    if (d.kind == Kind::skew_t && !(d.lambda > -1.0 && d.lambda < 1.0))
        throw InvalidArgument("skewness must lie in (-1, 1), got " + std::to_string(d.lambda));
}

std::string to_string(Kind kind) {
    switch (kind) {
        case Kind::normal: return "normal";
        case Kind::student_t: return "t";
        case Kind::skew_t: return "skewt";
    }
    return "?";
}

Kind parse_kind(std::string_view name) {
    if (name == "normal") return Kind::normal;
    if (name == "t" || name == "studentst" || name == "student_t") return Kind::student_t;
    if (name == "skewt" || name == "skew_t" || name == "skewstudent") return Kind::skew_t;
    throw InvalidArgument("unknown distribution '" + std::string(name) + "' (expected normal|t|skewt)");
}

LogDensity::LogDensity(const InnovationDist& d) : d_(d) {
    validate(d);
    if (d.kind == Kind::normal) {
        log_const_ = -kHalfLog2Pi;
        return;
    }
    const double lambda = d.kind == Kind::skew_t ? d.lambda : 0.0;
    const auto k = skew_constants(d.nu, lambda);
    a_ = k.a;
    b_ = k.b;
    c_ = k.c;
    d_.lambda = lambda;
    log_const_ = std::log(k.b) + log_c(d.nu);
    half_nu_plus_one_ = 0.5 * (d.nu + 1.0);
    inv_nu_minus_two_ = 1.0 / (d.nu - 2.0);
}

double LogDensity::operator()(double z) const noexcept {
    if (d_.kind == Kind::normal) return log_const_ - 0.5 * z * z;
    const double x = b_ * z + a_;
    const double u = x / (z < -a_ / b_ ? 1.0 - d_.lambda : 1.0 + d_.lambda);
    return log_const_ - half_nu_plus_one_ * std::log1p(u * u * inv_nu_minus_two_);
}

double log_density(double z, const InnovationDist& d) {
    if (!std::isfinite(z)) throw InvalidArgument("log_density: non-finite argument");
    return LogDensity(d)(z);
}

double cdf(double z, const InnovationDist& d) {
    validate(d);
    if (d.kind == Kind::normal) return 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double lambda = d.kind == Kind::skew_t ? d.lambda : 0.0;
    return skew_t_cdf(z, d.nu, lambda, skew_constants(d.nu, lambda));
}

double abs_moment(const InnovationDist& d) {
    validate(d);
    if (d.kind == Kind::normal) return std::sqrt(2.0 / std::numbers::pi);

    // Z = (W - a)/b splits into the half-lines of a unit-variance t variable U
    // stretched by (1 -/+ lambda); integrate |s u - a| piecewise using the
    // t CDF and the closed-form partial first moment.
    const double nu = d.nu;
    const double lambda = d.kind == Kind::skew_t ? d.lambda : 0.0;
    const auto k = skew_constants(nu, lambda);
    constexpr double inf = std::numeric_limits<double>::infinity();

    auto F = [&](double u) { return unit_t_cdf(u, nu); };
    auto M = [&](double u) { return unit_t_upper_moment(u, nu, k.c); };
    auto piece = [&](double s, double lo, double hi) {
        const double kink = k.a / s;
        double total = 0.0;
        if (const double l = std::max(lo, kink); l < hi) total += s * (M(l) - M(hi)) - k.a * (F(hi) - F(l));
        if (const double h = std::min(hi, kink); lo < h) total += k.a * (F(h) - F(lo)) - s * (M(lo) - M(h));
        return total;
    };
    const double w = (1.0 + lambda) * piece(1.0 + lambda, 0.0, inf) +
                     (1.0 - lambda) * piece(1.0 - lambda, -inf, 0.0);
    return w / k.b;
}

Sampler::Sampler(const InnovationDist& d, std::uint64_t seed) : d_(d), rng_(seed) {
    validate(d);
    if (d.kind == Kind::student_t) d_.lambda = 0.0;
    if (d.kind != Kind::normal) {
        const auto k = skew_constants(d_.nu, d_.lambda);
        a_ = k.a;
        b_ = k.b;
        c_ = k.c;
    }
}

double Sampler::operator()() {
    if (d_.kind == Kind::normal) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = rng_.uniform();
        const double u2 = rng_.uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    const double p = rng_.uniform();
    const SkewConstants k{a_, b_, c_};
    auto G = [&](double z) { return skew_t_cdf(z, d_.nu, d_.lambda, k); };
    double lo = -1.0, hi = 1.0;
    while (G(lo) > p) lo *= 2.0;
    while (G(hi) < p) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (G(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> sample(const InnovationDist& d, std::size_t n, std::uint64_t seed) {
    Sampler draw(d, seed);
    std::vector<double> out(n);
    for (auto& x : out) x = draw();
    return out;
}

}  // namespace vlab::dist
