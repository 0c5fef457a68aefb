#include "vlab/estimation.hpp"

#include "vlab/error.hpp"
#include "vlab/optimize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace vlab::estimation {

using garch::Family;
using garch::GarchParams;
using garch::GarchSpec;

std::optional<std::size_t> FitResult::index_of(std::string_view name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
}

ParamTransform::ParamTransform(const GarchSpec& spec, double margin) : spec_(spec), scale_(1.0 - margin) {
    garch::validate(spec);
    names_ = {"mu", "omega", "alpha"};
    if (spec.family != Family::garch) names_.push_back("gamma");
    names_.push_back("beta");
    if (spec.dist.kind != dist::Kind::normal) names_.push_back("nu");
    if (spec.dist.kind == dist::Kind::skew_t) names_.push_back("lambda");
}

std::pair<GarchParams, GarchSpec> ParamTransform::to_model(std::span<const double> theta) const {
    GarchParams p;
    GarchSpec spec = spec_;
    std::size_t i = 0;
    p.mu = theta[i++];
    switch (spec_.family) {
        case Family::garch: {
            p.omega = std::exp(theta[i++]);
            const double ea = std::exp(theta[i++]);
            const double eb = std::exp(theta[i++]);
            const double s = 1.0 + ea + eb;
            p.alpha = scale_ * ea / s;
            p.beta = scale_ * eb / s;
            break;
        }
        case Family::gjr: {
            // Simplex over (alpha/2, (alpha+gamma)/2, beta, slack).
            p.omega = std::exp(theta[i++]);
            const double e1 = std::exp(theta[i++]);
            const double e2 = std::exp(theta[i++]);
            const double e3 = std::exp(theta[i++]);
            const double s = 1.0 + e1 + e2 + e3;
            p.alpha = 2.0 * scale_ * e1 / s;
            p.gamma = 2.0 * scale_ * e2 / s - p.alpha;
            p.beta = scale_ * e3 / s;
            break;
        }
        case Family::egarch:
            p.omega = theta[i++];
            p.alpha = theta[i++];
            p.gamma = theta[i++];
            p.beta = scale_ * std::tanh(theta[i++]);
            break;
    }
    if (spec.dist.kind != dist::Kind::normal) spec.dist.nu = 2.0 + std::exp(theta[i++]);
    if (spec.dist.kind == dist::Kind::skew_t) spec.dist.lambda = std::tanh(theta[i++]);
    return {p, spec};
}

std::vector<double> ParamTransform::to_natural(std::span<const double> theta) const {
    const auto [p, spec] = to_model(theta);
    std::vector<double> out = {p.mu, p.omega, p.alpha};
    if (spec.family != Family::garch) out.push_back(p.gamma);
    out.push_back(p.beta);
    if (spec.dist.kind != dist::Kind::normal) out.push_back(spec.dist.nu);
    if (spec.dist.kind == dist::Kind::skew_t) out.push_back(spec.dist.lambda);
    return out;
}

std::vector<double> ParamTransform::to_theta(const GarchParams& p, const dist::InnovationDist& d) const {
    std::vector<double> theta = {p.mu};
    auto log_ratio = [](double part, double slack) {
        if (!(part > 0.0) || !(slack > 0.0)) throw InvalidArgument("starting point is not strictly feasible");
        return std::log(part / slack);
    };
    switch (spec_.family) {
        case Family::garch: {
            const double slack = scale_ - p.alpha - p.beta;
            theta.push_back(std::log(p.omega));
            theta.push_back(log_ratio(p.alpha, slack));
            theta.push_back(log_ratio(p.beta, slack));
            break;
        }
        case Family::gjr: {
            const double half_a = 0.5 * p.alpha;
            const double half_d = 0.5 * (p.alpha + p.gamma);
            const double slack = scale_ - half_a - half_d - p.beta;
            theta.push_back(std::log(p.omega));
            theta.push_back(log_ratio(half_a, slack));
            theta.push_back(log_ratio(half_d, slack));
            theta.push_back(log_ratio(p.beta, slack));
            break;
        }
        case Family::egarch:
            theta.push_back(p.omega);
            theta.push_back(p.alpha);
            theta.push_back(p.gamma);
            theta.push_back(std::atanh(p.beta / scale_));
            break;
    }
    if (spec_.dist.kind != dist::Kind::normal) theta.push_back(std::log(d.nu - 2.0));
    if (spec_.dist.kind == dist::Kind::skew_t) theta.push_back(std::atanh(d.lambda));
    return theta;
}

double bic(double loglik, std::size_t n, int k) {
    return -2.0 * loglik + std::log(static_cast<double>(n)) * static_cast<double>(k);
}

double p_value(double estimate, double std_error) {
    if (estimate == 0.0) return 1.0;
    return std::erfc(std::abs(estimate / std_error) / std::numbers::sqrt2);
}

std::pair<GarchParams, dist::InnovationDist> starting_point(const GarchSpec& spec, std::span<const double> returns) {
    const double n = static_cast<double>(returns.size());
    const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
    double var = 0.0;
    for (double r : returns) var += (r - mean) * (r - mean);
    var /= n;

    GarchParams p;
    p.mu = mean;
    p.alpha = 0.05;
    p.beta = 0.85;
    if (spec.family != Family::garch) p.gamma = 0.05;
    // egarch works on log variance: start at the intercept that puts the
    // stationary log variance at ln(var).
    p.omega = spec.family == Family::egarch ? (1.0 - p.beta) * std::log(var) : 0.1 * var;

    dist::InnovationDist d = spec.dist;
    d.nu = spec.dist.kind == dist::Kind::normal ? 0.0 : 8.0;
    d.lambda = 0.0;
    return {p, d};
}

namespace {

/// Negative mean log-likelihood in transformed space; +inf where the filter fails.
struct Objective {
    const ParamTransform& transform;
    std::span<const double> returns;

    double total_loglik(std::span<const double> theta) const {
        try {
            const auto [params, spec] = transform.to_model(theta);
            return garch::log_likelihood(spec, params, returns);
        } catch (const Error&) {
            return -std::numeric_limits<double>::infinity();
        }
    }

    double operator()(std::span<const double> theta) const {
        return -total_loglik(theta) / static_cast<double>(returns.size());
    }
};

}  // namespace

FitResult fit(const GarchSpec& spec, std::span<const double> returns, const FitOptions& options) {
    garch::validate(spec);
    if (spec.p != 1 || spec.q != 1) throw InvalidArgument("unsupported order: only p = q = 1 can be fitted");
    if (returns.size() < options.min_observations)
        throw InvalidArgument("need at least " + std::to_string(options.min_observations) + " returns to fit, got " +
                              std::to_string(returns.size()));
    for (double r : returns)
        if (!std::isfinite(r)) throw InvalidArgument("non-finite return in fitting sample");

    {
        const double n = static_cast<double>(returns.size());
        const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
        double var = 0.0;
        for (double r : returns) var += (r - mean) * (r - mean);
        var /= n;
        if (!(var > 1e-12 * std::max(1.0, mean * mean)))
            throw InvalidArgument("degenerate data: returns have zero variance");
    }
    const auto [p0, d0] = starting_point(spec, returns);

    const ParamTransform transform(spec, options.stationarity_margin);
    const Objective objective{transform, returns};
    const opt::Objective f = [&](std::span<const double> theta) { return objective(theta); };

    std::vector<double> theta = transform.to_theta(p0, d0);
    double best = f(theta);
    int iterations = 0;
    bool converged = false;
    for (int round = 0; round < options.max_rounds; ++round) {
        opt::NelderMeadOptions nm;
        nm.max_iterations = std::max(0, options.max_iterations - iterations);
        nm.xtol = options.xtol;
        nm.initial_step = round == 0 ? 0.1 : 1e-3;
        if (nm.max_iterations == 0) break;
        auto simplex = opt::nelder_mead(f, theta, nm);
        iterations += simplex.iterations;
        converged = simplex.converged;
        auto polished = opt::coordinate_polish(f, simplex.x);
        const double gain = best - polished.fx;
        if (polished.fx <= best) {
            theta = std::move(polished.x);
            best = polished.fx;
        }
        if (round > 0 && gain <= 1e-13) break;
    }

    FitResult result;
    std::tie(result.params, result.spec) = transform.to_model(theta);
    result.names = transform.names();
    result.estimates = transform.to_natural(theta);
    result.n_obs = returns.size();
    result.k = static_cast<int>(transform.size());
    result.loglik = objective.total_loglik(theta);
    result.bic = bic(result.loglik, result.n_obs, result.k);
    result.iterations = iterations;
    result.margin = garch::stationarity_margin(result.spec, result.params);
    result.converged = converged && result.margin > 0.0 && std::isfinite(result.loglik);
    if (!result.converged) {
        result.diagnostic = "optimizer stopped after " + std::to_string(iterations) + " iterations without converging";
        result.std_errors.assign(result.estimates.size(), std::numeric_limits<double>::quiet_NaN());
        result.p_values = result.std_errors;
        return result;
    }
    return infer(std::move(result), returns, options);
}

FitResult infer(FitResult fit, std::span<const double> returns, const FitOptions& options) {
    const std::size_t k = fit.estimates.size();
    fit.std_errors.assign(k, std::numeric_limits<double>::quiet_NaN());
    fit.p_values.assign(k, std::numeric_limits<double>::quiet_NaN());
    fit.std_errors_available = false;
    if (!fit.converged) {
        fit.diagnostic = "inference skipped: fit did not converge";
        return fit;
    }

    const ParamTransform transform(fit.spec, options.stationarity_margin);
    const Objective objective{transform, returns};
    const std::vector<double> theta = transform.to_theta(fit.params, fit.spec.dist);
    auto L = [&](const std::vector<double>& x) { return objective.total_loglik(x); };

    std::vector<double> h(k);
    for (std::size_t i = 0; i < k; ++i) h[i] = std::max(1e-4, 1e-4 * std::abs(theta[i]));

    Eigen::MatrixXd neg_hessian(k, k);
    const double f0 = L(theta);
    for (std::size_t i = 0; i < k; ++i) {
        auto x = theta;
        x[i] = theta[i] + h[i];
        const double fp = L(x);
        x[i] = theta[i] - h[i];
        const double fm = L(x);
        neg_hessian(i, i) = -(fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for (std::size_t j = 0; j < i; ++j) {
            auto y = theta;
            auto eval = [&](double si, double sj) {
                y[i] = theta[i] + si * h[i];
                y[j] = theta[j] + sj * h[j];
                return L(y);
            };
            const double v = -(eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * h[i] * h[j]);
            neg_hessian(i, j) = v;
            neg_hessian(j, i) = v;
        }
    }
    if (!neg_hessian.allFinite()) {
        fit.diagnostic = "standard errors unavailable: Hessian has non-finite entries";
        return fit;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(neg_hessian);
    if (llt.info() != Eigen::Success) {
        fit.diagnostic = "standard errors unavailable: negative Hessian is not positive definite";
        return fit;
    }
    const Eigen::MatrixXd cov_theta = llt.solve(Eigen::MatrixXd::Identity(k, k));

    // Delta method: Jacobian of the natural parameters w.r.t. theta.
    Eigen::MatrixXd jac(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        const double step = 1e-6 * std::max(1.0, std::abs(theta[j]));
        auto xp = theta, xm = theta;
        xp[j] += step;
        xm[j] -= step;
        const auto np = transform.to_natural(xp);
        const auto nm = transform.to_natural(xm);
        for (std::size_t i = 0; i < k; ++i) jac(i, j) = (np[i] - nm[i]) / (2.0 * step);
    }
    const Eigen::MatrixXd cov = jac * cov_theta * jac.transpose();
    for (std::size_t i = 0; i < k; ++i) {
        if (!(cov(i, i) >= 0.0)) {
            fit.diagnostic = "standard errors unavailable: negative variance for " + fit.names[i];
            std::fill(fit.std_errors.begin(), fit.std_errors.end(), std::numeric_limits<double>::quiet_NaN());
            return fit;
        }
        fit.std_errors[i] = std::sqrt(cov(i, i));
        fit.p_values[i] = p_value(fit.estimates[i], fit.std_errors[i]);
    }
    fit.std_errors_available = true;
    fit.diagnostic.clear();
    return fit;
}

OrderCandidate pick_best(std::span<const OrderCandidate> table) {
    const OrderCandidate* best = nullptr;
    for (const auto& c : table) {
        if (!c.bic) continue;
        if (!best) {
            best = &c;
            continue;
        }
        const auto key = [](const OrderCandidate& x) { return std::tuple(*x.bic, x.p + x.q, x.p); };
        if (key(c) < key(*best)) best = &c;
    }
    if (!best) throw InvalidArgument("no order candidate could be fitted");
    return *best;
}

OrderSelection select_order(std::span<const double> returns, Family family, dist::Kind dist_kind,
                            std::span<const int> p_grid, std::span<const int> q_grid, const FitOptions& options) {
    if (p_grid.empty() || q_grid.empty()) throw InvalidArgument("order grids must be non-empty");
    OrderSelection out;
    for (int p : p_grid) {
        for (int q : q_grid) {
            OrderCandidate c{p, q, std::nullopt, ""};
            if (p != 1 || q != 1) {
                c.status = "unsupported order";
            } else {
                const dist::InnovationDist d{dist_kind, dist_kind == dist::Kind::normal ? 0.0 : 8.0, 0.0};
                const auto spec = GarchSpec::make(family, d);
                try {
                    const auto result = fit(spec, returns, options);
                    if (result.converged) {
                        c.bic = result.bic;
                        c.status = "ok";
                    } else {
                        c.status = result.diagnostic;
                    }
                } catch (const Error& e) {
                    c.status = e.what();
                }
            }
            out.table.push_back(std::move(c));
        }
    }
    const auto best = pick_best(out.table);
    out.p = best.p;
    out.q = best.q;
    return out;
}

}  // namespace vlab::estimation
