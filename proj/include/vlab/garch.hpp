#pragma once

#include "vlab/dist.hpp"
#include "vlab/market_data.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vlab::garch {

enum class Family { garch, gjr, egarch };

[[nodiscard]] std::string to_string(Family family);
[[nodiscard]] Family parse_family(std::string_view name);

/// Model family, lag orders and innovation distribution. The mean model is
/// always a constant.
struct GarchSpec {
    Family family = Family::garch;
    int p = 1;
    int q = 1;
    int o = 0;
    dist::InnovationDist dist;

    /// Spec with the default orders for `family` (o = 1 for gjr/egarch).
    [[nodiscard]] static GarchSpec make(Family family, dist::InnovationDist d = dist::InnovationDist::normal());
};

/// Throws InvalidArgument on inconsistent orders or distribution.
void validate(const GarchSpec& spec);

/// Mean and variance-equation coefficients. For egarch, omega is the
/// log-variance intercept. Shape parameters live in GarchSpec::dist.
struct GarchParams {
    double mu = 0.0;
    double omega = 0.0;
    double alpha = 0.0;
    double gamma = 0.0;
    double beta = 0.0;

    friend bool operator==(const GarchParams&, const GarchParams&) = default;
};

/// Throws InvalidArgument unless positivity (garch/gjr) or |beta| < 1 (egarch) holds.
void validate(const GarchSpec& spec, const GarchParams& params);

struct VariancePath {
    std::vector<double> sigma2;
    std::vector<double> residuals;      // r_t - mu
    std::vector<double> std_residuals;  // residuals / sigma

    [[nodiscard]] std::size_t size() const noexcept { return sigma2.size(); }
};

/// Conditional variance recursion.
///
///   garch:  s2[t] = omega + alpha e[t-1]^2 + beta s2[t-1]
///   gjr:    s2[t] = omega + (alpha + gamma 1{e[t-1] < 0}) e[t-1]^2 + beta s2[t-1]
///   egarch: ln s2[t] = omega + alpha (|z[t-1]| - E|z|) + gamma z[t-1] + beta ln s2[t-1]
///
/// s2[0] is `initial_variance` when given, otherwise the backcast
/// mean(e[t]^2) over the whole sample. Throws NumericError naming the index
/// of the first non-positive or non-finite variance.
[[nodiscard]] VariancePath filter_variance(const GarchSpec& spec, const GarchParams& params,
                                           std::span<const double> returns,
                                           std::optional<double> initial_variance = std::nullopt);

/// Sum over t of ln g(z_t) - ln(s2_t)/2.
[[nodiscard]] double log_likelihood(const GarchSpec& spec, const GarchParams& params,
                                    std::span<const double> returns);

/// Same sum for an already filtered path.
[[nodiscard]] double log_likelihood(const VariancePath& path, const dist::InnovationDist& d);

/// Distance of the persistence from 1: 1 - alpha - beta (garch),
/// 1 - alpha - gamma/2 - beta (gjr), 1 - |beta| (egarch).
[[nodiscard]] double stationarity_margin(const GarchSpec& spec, const GarchParams& params);

/// Variance the simulator starts from: the unconditional variance for
/// garch/gjr, exp(omega / (1 - beta)) for egarch.
[[nodiscard]] double stationary_variance(const GarchSpec& spec, const GarchParams& params);

struct SimulatedPath {
    std::vector<double> returns;
    std::vector<double> sigma2;
    double initial_variance = 0.0;
};

/// r_t = mu + sigma_t z_t with the filter_variance recursion. Requires a
/// positive stationarity margin.
[[nodiscard]] SimulatedPath simulate_path(const GarchSpec& spec, const GarchParams& params, std::size_t n,
                                          std::uint64_t seed);

/// simulate_path wrapped as a dated ReturnSeries (consecutive synthetic dates).
[[nodiscard]] market::ReturnSeries simulate(const GarchSpec& spec, const GarchParams& params, std::size_t n,
                                            std::uint64_t seed);

enum class ForecastMethod { analytic, simulation };

struct ForecastResult {
    int horizon = 0;
    std::vector<double> sigma2_path;
    std::vector<double> sigma_path;
    ForecastMethod method = ForecastMethod::analytic;
    int n_paths = 0;
    std::uint64_t seed = 0;
};

/// Variance forecasts for steps T+1 .. T+horizon after the end of `path`.
/// garch/gjr are analytic; egarch is analytic for one step and Monte-Carlo
/// (n_paths >= 100) beyond that.
[[nodiscard]] ForecastResult forecast(const GarchSpec& spec, const GarchParams& params, const VariancePath& path,
                                      int horizon, int n_paths = 1000, std::uint64_t seed = 0);

}  // namespace vlab::garch
