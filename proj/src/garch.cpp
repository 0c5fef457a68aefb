#include "vlab/garch.hpp"

#include "vlab/error.hpp"
#include "vlab/rng.hpp"

#include <cmath>
#include <numeric>

namespace vlab::garch {

namespace {

double backcast(std::span<const double> returns, double mu) {
    double ss = 0.0;
    for (double r : returns) ss += (r - mu) * (r - mu);
    return ss / static_cast<double>(returns.size());
}

[[noreturn]] void bad_variance(std::size_t t, double v) {
    throw NumericError("conditional variance " + std::to_string(v) + " invalid at index " + std::to_string(t));
}

}  // namespace

std::string to_string(Family family) {
    switch (family) {
        case Family::garch: return "garch";
        case Family::gjr: return "gjr";
        case Family::egarch: return "egarch";
    }
    return "?";
}

Family parse_family(std::string_view name) {
    if (name == "garch") return Family::garch;
    if (name == "gjr" || name == "gjr-garch") return Family::gjr;
    if (name == "egarch") return Family::egarch;
    throw InvalidArgument("unknown model family '" + std::string(name) + "' (expected garch|gjr|egarch)");
}

GarchSpec GarchSpec::make(Family family, dist::InnovationDist d) {
    GarchSpec spec{family, 1, 1, family == Family::garch ? 0 : 1, d};
    validate(spec);
    return spec;
}

void validate(const GarchSpec& spec) {
    if (spec.p < 1 || spec.q < 1) throw InvalidArgument("GARCH orders p and q must be at least 1");
    if (spec.o < 0 || spec.o > 1) throw InvalidArgument("asymmetry order o must be 0 or 1");
    if (spec.family == Family::garch && spec.o != 0) throw InvalidArgument("plain garch takes o = 0");
    if (spec.family != Family::garch && spec.o != 1) throw InvalidArgument("gjr/egarch require o = 1");
    dist::validate(spec.dist);
}

void validate(const GarchSpec& spec, const GarchParams& params) {
    validate(spec);
    if (spec.p != 1 || spec.q != 1)
        throw InvalidArgument("only p = q = 1 recursions are supported");
    const bool finite = std::isfinite(params.mu) && std::isfinite(params.omega) && std::isfinite(params.alpha) &&
                        std::isfinite(params.gamma) && std::isfinite(params.beta);
    if (!finite) throw InvalidArgument("non-finite GARCH parameter");
    if (spec.family == Family::egarch) {
        if (!(std::abs(params.beta) < 1.0)) throw InvalidArgument("egarch requires |beta| < 1");
        return;
    }
    if (!(params.omega > 0.0)) throw InvalidArgument("omega must be positive");
    if (params.alpha < 0.0 || params.beta < 0.0) throw InvalidArgument("alpha and beta must be non-negative");
    if (spec.family == Family::gjr && params.alpha + params.gamma < 0.0)
        throw InvalidArgument("gjr requires alpha + gamma >= 0");
}

VariancePath filter_variance(const GarchSpec& spec, const GarchParams& params, std::span<const double> returns,
                             std::optional<double> initial_variance) {
    validate(spec, params);
    if (returns.empty() || (!initial_variance && returns.size() < 2))
        throw InvalidArgument("variance filter needs at least 2 returns");

    const std::size_t n = returns.size();
    VariancePath path;
    path.sigma2.resize(n);
    path.residuals.resize(n);
    path.std_residuals.resize(n);
    for (std::size_t t = 0; t < n; ++t) path.residuals[t] = returns[t] - params.mu;

    double s2 = initial_variance ? *initial_variance : backcast(returns, params.mu);
    if (!(s2 > 0.0) || !std::isfinite(s2)) bad_variance(0, s2);
    path.sigma2[0] = s2;
    path.std_residuals[0] = path.residuals[0] / std::sqrt(s2);

    const auto& e = path.residuals;
    switch (spec.family) {
        case Family::garch:
        case Family::gjr: {
            const double gamma = spec.family == Family::gjr ? params.gamma : 0.0;
            for (std::size_t t = 1; t < n; ++t) {
                const double prev = e[t - 1];
                const double arch = prev < 0.0 ? params.alpha + gamma : params.alpha;
                s2 = params.omega + arch * prev * prev + params.beta * s2;
                if (!(s2 > 0.0) || !std::isfinite(s2)) bad_variance(t, s2);
                path.sigma2[t] = s2;
                path.std_residuals[t] = e[t] / std::sqrt(s2);
            }
            break;
        }
        case Family::egarch: {
            const double e_abs = dist::abs_moment(spec.dist);
            for (std::size_t t = 1; t < n; ++t) {
                const double z = path.std_residuals[t - 1];
                s2 = std::exp(params.omega + params.alpha * (std::abs(z) - e_abs) + params.gamma * z +
                              params.beta * std::log(s2));
                if (!(s2 > 0.0) || !std::isfinite(s2)) bad_variance(t, s2);
                path.sigma2[t] = s2;
                path.std_residuals[t] = e[t] / std::sqrt(s2);
            }
            break;
        }
    }
    return path;
}

double log_likelihood(const VariancePath& path, const dist::InnovationDist& d) {
    const dist::LogDensity log_g(d);
    double total = 0.0;
    for (std::size_t t = 0; t < path.size(); ++t)
        total += log_g(path.std_residuals[t]) - 0.5 * std::log(path.sigma2[t]);
    if (!std::isfinite(total)) throw NumericError("log-likelihood is not finite");
    return total;
}

double log_likelihood(const GarchSpec& spec, const GarchParams& params, std::span<const double> returns) {
    return log_likelihood(filter_variance(spec, params, returns), spec.dist);
}

double stationarity_margin(const GarchSpec& spec, const GarchParams& params) {
    switch (spec.family) {
        case Family::garch: return 1.0 - params.alpha - params.beta;
        case Family::gjr: return 1.0 - params.alpha - 0.5 * params.gamma - params.beta;
        case Family::egarch: return 1.0 - std::abs(params.beta);
    }
    return 0.0;
}

double stationary_variance(const GarchSpec& spec, const GarchParams& params) {
    const double margin = stationarity_margin(spec, params);
    if (!(margin > 0.0)) throw InvalidArgument("parameters are not stationary");
    if (spec.family == Family::egarch) return std::exp(params.omega / (1.0 - params.beta));
    return params.omega / margin;
}

SimulatedPath simulate_path(const GarchSpec& spec, const GarchParams& params, std::size_t n, std::uint64_t seed) {
    validate(spec, params);
    if (n == 0) throw InvalidArgument("simulation length must be positive");

    SimulatedPath out;
    out.initial_variance = stationary_variance(spec, params);
    out.returns.resize(n);
    out.sigma2.resize(n);

    dist::Sampler draw(spec.dist, seed);
    const double e_abs = spec.family == Family::egarch ? dist::abs_moment(spec.dist) : 0.0;
    double s2 = out.initial_variance;
    double prev_e = 0.0, prev_z = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) {
            switch (spec.family) {
                case Family::garch: s2 = params.omega + params.alpha * prev_e * prev_e + params.beta * s2; break;
                case Family::gjr: {
                    const double arch = prev_e < 0.0 ? params.alpha + params.gamma : params.alpha;
                    s2 = params.omega + arch * prev_e * prev_e + params.beta * s2;
                    break;
                }
                case Family::egarch:
                    s2 = std::exp(params.omega + params.alpha * (std::abs(prev_z) - e_abs) + params.gamma * prev_z +
                                  params.beta * std::log(s2));
                    break;
            }
        }
        const double z = draw();
        out.sigma2[t] = s2;
        out.returns[t] = params.mu + std::sqrt(s2) * z;
        // Store the residual exactly as the filter will recompute it.
        prev_e = out.returns[t] - params.mu;
        prev_z = prev_e / std::sqrt(s2);
    }
    return out;
}

market::ReturnSeries simulate(const GarchSpec& spec, const GarchParams& params, std::size_t n, std::uint64_t seed) {
    return market::make_series(simulate_path(spec, params, n, seed).returns);
}

ForecastResult forecast(const GarchSpec& spec, const GarchParams& params, const VariancePath& path, int horizon,
                        int n_paths, std::uint64_t seed) {
    validate(spec, params);
    if (path.size() == 0) throw InvalidArgument("forecast needs a non-empty variance path");
    if (horizon < 1) throw InvalidArgument("forecast horizon must be at least 1");

    ForecastResult out;
    out.horizon = horizon;
    out.seed = seed;
    out.sigma2_path.resize(static_cast<std::size_t>(horizon));

    const double e_last = path.residuals.back();
    const double s2_last = path.sigma2.back();

    if (spec.family != Family::egarch) {
        const double gamma = spec.family == Family::gjr ? params.gamma : 0.0;
        const double arch = e_last < 0.0 ? params.alpha + gamma : params.alpha;
        const double phi = params.alpha + 0.5 * gamma + params.beta;
        double s2 = params.omega + arch * e_last * e_last + params.beta * s2_last;
        out.sigma2_path[0] = s2;
        for (int h = 1; h < horizon; ++h) {
            s2 = params.omega + phi * s2;
            out.sigma2_path[static_cast<std::size_t>(h)] = s2;
        }
        out.method = ForecastMethod::analytic;
    } else {
        const double e_abs = dist::abs_moment(spec.dist);
        const double z_last = path.std_residuals.back();
        const double log_first = params.omega + params.alpha * (std::abs(z_last) - e_abs) + params.gamma * z_last +
                                 params.beta * std::log(s2_last);
        out.sigma2_path[0] = std::exp(log_first);
        if (horizon == 1) {
            out.method = ForecastMethod::analytic;
        } else {
            if (n_paths < 100) throw InvalidArgument("egarch multi-step forecasts need at least 100 simulation paths");
            out.method = ForecastMethod::simulation;
            out.n_paths = n_paths;
            std::vector<double> sums(static_cast<std::size_t>(horizon), 0.0);
            for (int p = 0; p < n_paths; ++p) {
                dist::Sampler draw(spec.dist, mix_seed(seed, static_cast<std::uint64_t>(p)));
                double log_s2 = log_first;
                for (int h = 1; h < horizon; ++h) {
                    const double z = draw();
                    log_s2 = params.omega + params.alpha * (std::abs(z) - e_abs) + params.gamma * z +
                             params.beta * log_s2;
                    sums[static_cast<std::size_t>(h)] += std::exp(log_s2);
                }
            }
            for (int h = 1; h < horizon; ++h)
                out.sigma2_path[static_cast<std::size_t>(h)] = sums[static_cast<std::size_t>(h)] / n_paths;
        }
    }
    for (std::size_t h = 0; h < out.sigma2_path.size(); ++h) {
        if (!(out.sigma2_path[h] > 0.0) || !std::isfinite(out.sigma2_path[h])) bad_variance(h, out.sigma2_path[h]);
    }
    out.sigma_path.reserve(out.sigma2_path.size());
    for (double s2 : out.sigma2_path) out.sigma_path.push_back(std::sqrt(s2));
    return out;
}

}  // namespace vlab::garch
