#pragma once

#include "vlab/rng.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vlab::dist {

enum class Kind { normal, student_t, skew_t };

/// Innovation distribution, always standardized to zero mean and unit
/// variance. `nu` is used by the t kinds (nu > 2), `lambda` by skew_t
/// (-1 < lambda < 1).
struct InnovationDist {
    Kind kind = Kind::normal;
    double nu = 0.0;
    double lambda = 0.0;

    [[nodiscard]] static InnovationDist normal() { return {}; }
    [[nodiscard]] static InnovationDist student_t(double nu);
    [[nodiscard]] static InnovationDist skew_t(double nu, double lambda);

    /// Number of free shape parameters (0, 1 or 2).
    [[nodiscard]] int shape_count() const noexcept;

    friend bool operator==(const InnovationDist&, const InnovationDist&) = default;
};

/// Throws InvalidArgument when nu/lambda are outside their domains.
void validate(const InnovationDist& d);

/// "normal", "t", "skewt".
[[nodiscard]] std::string to_string(Kind kind);
[[nodiscard]] Kind parse_kind(std::string_view name);

/// Log-density with the normalizing constants computed once. Use this in
/// likelihood loops; `log_density` below recomputes them on every call.
class LogDensity {
public:
    explicit LogDensity(const InnovationDist& d);

    [[nodiscard]] double operator()(double z) const noexcept;

    /// Hansen's skewed-t constants (a = 0, b = 1 for the symmetric kinds).
    [[nodiscard]] double a() const noexcept { return a_; }
    [[nodiscard]] double b() const noexcept { return b_; }
    [[nodiscard]] double c() const noexcept { return c_; }

private:
    InnovationDist d_;
    double log_const_ = 0.0;  // normal: -ln(2 pi)/2; t kinds: ln(b c)
    double a_ = 0.0;
    double b_ = 1.0;
    double c_ = 0.0;
    double half_nu_plus_one_ = 0.0;
    double inv_nu_minus_two_ = 0.0;
};

/// ln g(z) of the standardized density. Throws InvalidArgument on non-finite z.
[[nodiscard]] double log_density(double z, const InnovationDist& d);

/// P(Z <= z).
[[nodiscard]] double cdf(double z, const InnovationDist& d);

/// E|Z|.
[[nodiscard]] double abs_moment(const InnovationDist& d);

/// n iid standardized draws; identical output for identical (d, n, seed).
[[nodiscard]] std::vector<double> sample(const InnovationDist& d, std::size_t n, std::uint64_t seed);

/// Sampler object for incremental draws (simulation and Monte-Carlo forecasts).
/// Normal draws use Box-Muller; the t kinds invert the CDF by bisection.
class Sampler {
public:
    Sampler(const InnovationDist& d, std::uint64_t seed);

    double operator()();

private:
    InnovationDist d_;
    Rng rng_;
    double a_ = 0.0;
    double b_ = 1.0;
    double c_ = 0.0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace vlab::dist
